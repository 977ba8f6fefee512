#pragma once

#include <cstdint>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "kgcrawl/corpusgen.hpp"
#include "kgcrawl/embed.hpp"

// Simulated victim RAG service.
//
// Retrieval is exact top-k cosine over document embeddings; generation
// is a leaky extractive step that echoes the fact lines of the retrieved
// documents, each line independently with probability p_leak (seeded, so
// a round replays identically). A regex blocklist refuses prompts that
// look like verbatim-dump jailbreaks. Query rewriting and multi-query
// fusion are optional hardening modes.
//
// The attacker only ever sees answer(); everything the retriever touched
// is recorded on a separate oracle that evaluation reads after the fact.

namespace kgcrawl {

enum class victim_mode { vanilla, rewrite, multi_query };

std::vector<std::string> default_refusal_patterns();

struct victim_config {
    int k = 10;
    double p_leak = 1.0;
    victim_mode mode = victim_mode::vanilla;
    int n_subqueries = 3;        // multi_query only; includes the original
    double rrf_constant = 60.0;
    std::vector<std::string> refusal_patterns = default_refusal_patterns();
    std::uint64_t seed = 0;
};

struct rag_answer {
    std::string text;
    bool refused = false;
};

struct oracle_round {
    int round = 0;
    std::vector<std::string> retrieved;
    bool refused = false;
};

// Ground-truth retrieval log. Not visible through answer_endpoint.
class retrieval_oracle {
public:
    void record(int round, std::vector<std::string> retrieved, bool refused);
    const std::vector<oracle_round>& rounds() const { return rounds_; }
    // Distinct doc ids retrieved in non-refused rounds.
    std::set<std::string> covered_ids() const;
    void write_jsonl(const std::string& path) const;

private:
    std::vector<oracle_round> rounds_;
};

// The only surface the attack loop is allowed to call.
class answer_endpoint {
public:
    virtual ~answer_endpoint() = default;
    virtual rag_answer answer(const std::string& query) = 0;
};

// Reciprocal rank fusion over several rankings; ties broken by id.
std::vector<std::string> rrf_fuse(const std::vector<std::vector<std::string>>& rankings,
                                  double constant);

class victim final : public answer_endpoint {
public:
    victim(std::vector<synthetic_doc> corpus, const embedder_spec& espec, victim_config cfg);

    rag_answer answer(const std::string& query) override;

    // The stages, individually callable for tests and evaluation.
    std::vector<std::string> retrieve(const std::string& query, int k) const;
    std::string rewrite_query(const std::string& query) const;
    std::vector<std::string> fused_retrieve(const std::string& query) const;
    bool matches_refusal(const std::string& text) const;
    rag_answer generate(const std::string& query, const std::vector<std::string>& doc_ids,
                        int round) const;

    const retrieval_oracle& oracle() const { return oracle_; }
    const std::vector<synthetic_doc>& corpus() const { return corpus_; }
    const synthetic_doc& doc(const std::string& id) const;
    const victim_config& config() const { return cfg_; }
    const embedder& doc_embedder() const { return embedder_; }
    int rounds_answered() const { return next_round_; }

    static const char* refusal_text();

private:
    std::vector<std::string> subqueries(const std::string& query) const;

    std::vector<synthetic_doc> corpus_;
    std::map<std::string, std::size_t> doc_pos_;
    embedder embedder_;
    vector_index index_;
    victim_config cfg_;
    std::vector<std::regex> refusal_res_;
    retrieval_oracle oracle_;
    int next_round_ = 0;
};

}  // namespace kgcrawl
