#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kgcrawl/embed.hpp"
#include "kgcrawl/kg.hpp"
#include "kgcrawl/sched.hpp"

// Query generation.
//
// Turns a scheduled (entity, relation) pair into natural-language text
// via rotating templates, or into a neighborhood probe when no relation
// cleared the deficit gate. Candidate queries are checked against the
// history: anything whose embedding lands within tau_dup of a past query
// is discarded, the anchor is penalized, and a fresh anchor is drawn.
// max_trials consecutive discards signal convergence.
//
// Dedup compares content words only (dedup_key strips template glue
// like "what are the ... associated with"). In the raw hashing space
// the glue dominates: probes about different entities score ~0.85
// while rephrasings of the same target score ~0.3, the exact opposite
// of what tau_dup is meant to separate. Keyed on content, a duplicate
// is "same entities and relation words, any phrasing".
//
// Templates avoid wording the victim's blocklist would refuse; an
// optional external realizer may rephrase a query, but its output is
// only accepted when it still mentions the anchor and stays off the
// blocklist.

namespace kgcrawl {

struct qgen_config {
    double tau_dup = 0.8;
    int max_trials = 50;
    std::uint64_t seed = 0;
    std::vector<std::string> blocklist = {"verbatim", "repeat all", "ignore previous"};
};

struct query_history {
    std::vector<std::string> queries;
    std::vector<embedding_vector> embeddings;  // of dedup keys, not raw text

    void append(std::string query, embedding_vector vec);
    std::size_t size() const { return queries.size(); }
};

// The content words of a query, lowercased, in order. Falls back to the
// full normalized text when everything was glue.
std::string dedup_key(const std::string& query);
embedding_vector dedup_embedding(const embedder& e, const std::string& query);

enum class query_mode { bootstrap, relation_probe, neighborhood };
const char* to_string(query_mode mode);

struct generated_query {
    std::string text;
    entity_id anchor = -1;
    std::optional<std::string> relation;
    query_mode mode = query_mode::relation_probe;
    int trials = 1;  // anchor draws spent, including the successful one
    score_parts anchor_score;
};

// nullopt query means the generator declared convergence.
struct qgen_outcome {
    std::optional<generated_query> query;

    bool converged() const { return !query.has_value(); }
};

class query_realizer {
public:
    virtual ~query_realizer() = default;
    virtual std::optional<std::string> realize(const std::string& entity,
                                               const std::optional<std::string>& relation,
                                               const std::vector<std::string>& neighbors) = 0;
};

class query_generator {
public:
    query_generator(const embedder* query_embedder, qgen_config cfg,
                    query_realizer* realizer = nullptr);

    // Noun phrase used in templates for a relation label; empty when the
    // label has no curated phrasing.
    static std::string relation_phrase(const std::string& relation);

    std::string relation_probe_text(const std::string& entity, const std::string& relation,
                                    int variant) const;
    // Missing relations are ranked by deficit; rotation picks among the
    // tied ones, so an anchor keeps yielding fresh queries as long as it
    // has unprobed relation pairs (0 = canonical name-ordered ties).
    std::string neighborhood_text(const knowledge_graph& g, entity_id e,
                                  unsigned rotation = 0) const;

    bool is_duplicate(const std::string& query, const query_history& hist) const;
    bool passes_blocklist(const std::string& query) const;

    qgen_outcome next_query(scheduler& sched, const knowledge_graph& g,
                            const query_history& hist, int t);

private:
    const embedder* embedder_;
    qgen_config cfg_;
    query_realizer* realizer_;
    std::mt19937_64 rng_;
};

}  // namespace kgcrawl
