#include "kgcrawl/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "kgcrawl/errors.hpp"

namespace kgcrawl {

double coverage_rate(const retrieval_oracle& oracle, std::size_t corpus_size) {
    if (corpus_size == 0) return 0.0;
    return static_cast<double>(oracle.covered_ids().size()) / static_cast<double>(corpus_size);
}

double rouge_l(const std::string& reference, const std::string& candidate) {
    const std::vector<std::string> ref = tokenize(reference);
    const std::vector<std::string> cand = tokenize(candidate);
    if (ref.empty() && cand.empty()) return 1.0;
    if (ref.empty() || cand.empty()) return 0.0;

    // Classic LCS table, rolling rows.
    std::vector<std::size_t> prev(cand.size() + 1, 0);
    std::vector<std::size_t> cur(cand.size() + 1, 0);
    for (std::size_t i = 1; i <= ref.size(); ++i) {
        for (std::size_t j = 1; j <= cand.size(); ++j) {
            if (ref[i - 1] == cand[j - 1]) {
                cur[j] = prev[j - 1] + 1;
            } else {
                cur[j] = std::max(prev[j], cur[j - 1]);
            }
        }
        std::swap(prev, cur);
    }
    const double lcs = static_cast<double>(prev[cand.size()]);
    if (lcs == 0.0) return 0.0;
    const double precision = lcs / static_cast<double>(cand.size());
    const double recall = lcs / static_cast<double>(ref.size());
    return 2.0 * precision * recall / (precision + recall);
}

double semantic_fidelity(const std::vector<std::string>& snippets, const synthetic_doc& doc,
                         const embedder& emb) {
    if (snippets.empty()) return 0.0;
    const embedding_vector dv = emb.embed(doc.text);
    double best = -1.0;
    for (const std::string& snippet : snippets) {
        if (tokenize(snippet).empty()) continue;
        best = std::max(best, cosine(emb.embed(snippet), dv));
    }
    return best < 0.0 ? 0.0 : best;
}

double mean_semantic_fidelity(const std::vector<std::string>& snippets,
                              const std::vector<synthetic_doc>& docs, const embedder& emb) {
    if (docs.empty()) return 0.0;
    // Embed snippets once; docs reuse them.
    std::vector<embedding_vector> svecs;
    svecs.reserve(snippets.size());
    for (const std::string& snippet : snippets) {
        if (!tokenize(snippet).empty()) svecs.push_back(emb.embed(snippet));
    }
    double total = 0.0;
    for (const synthetic_doc& doc : docs) {
        if (svecs.empty()) continue;
        const embedding_vector dv = emb.embed(doc.text);
        double best = -1.0;
        for (const embedding_vector& sv : svecs) best = std::max(best, cosine(sv, dv));
        total += std::max(best, 0.0);
    }
    return total / static_cast<double>(docs.size());
}

std::vector<synthetic_doc> snippets_from_graph(const knowledge_graph& g) {
    // Outgoing edges grouped by head, canonical names, sorted.
    std::map<std::string, std::vector<triple>> by_head;
    for (const triple& t : g.edge_triples()) by_head[t.head].push_back(t);

    std::vector<synthetic_doc> out;
    int counter = 0;
    for (const auto& [head, facts] : by_head) {
        synthetic_doc doc;
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "snip_%04d", counter++);
        doc.id = idbuf;
        doc.title = "Reconstructed notes on " + head + ".";
        std::string body = doc.title;
        for (const triple& t : facts) {
            body.push_back('\n');
            body += render_fact_line(t);
            doc.facts.push_back(t);
        }
        doc.text = std::move(body);
        out.push_back(std::move(doc));
    }
    return out;
}

reconstruction_report reconstruction_fidelity(const std::vector<synthetic_doc>& surrogate_corpus,
                                              const std::vector<synthetic_doc>& true_corpus,
                                              const embedder_spec& espec, int k,
                                              const std::vector<std::string>& eval_queries) {
    reconstruction_report report;
    report.n_queries = static_cast<int>(eval_queries.size());
    if (eval_queries.empty() || surrogate_corpus.empty() || true_corpus.empty()) return report;

    victim_config vcfg;
    vcfg.k = k;
    vcfg.p_leak = 1.0;
    vcfg.mode = victim_mode::vanilla;

    victim reference(true_corpus, espec, vcfg);
    victim surrogate(surrogate_corpus, espec, vcfg);
    const embedder emb(espec);

    int successes = 0;
    double sim_total = 0.0;
    double rouge_total = 0.0;
    int compared = 0;
    for (const std::string& q : eval_queries) {
        const rag_answer ref = reference.answer(q);
        const rag_answer sur = surrogate.answer(q);
        const bool substantive =
            !sur.refused && sur.text.find('\n') != std::string::npos;  // any fact line at all
        if (substantive) ++successes;
        if (!ref.refused && !sur.refused) {
            sim_total += cosine(emb.embed(ref.text), emb.embed(sur.text));
            rouge_total += rouge_l(ref.text, sur.text);
            ++compared;
        }
    }
    report.success_rate = static_cast<double>(successes) / static_cast<double>(eval_queries.size());
    if (compared > 0) {
        report.answer_similarity = sim_total / compared;
        report.rouge = rouge_total / compared;
    }
    return report;
}

std::vector<std::string> eval_queries_for(const std::vector<synthetic_doc>& corpus,
                                          std::size_t cap) {
    std::set<std::string> heads;
    for (const synthetic_doc& doc : corpus) {
        for (const triple& t : doc.facts) heads.insert(t.head);
    }
    std::vector<std::string> out;
    for (const std::string& head : heads) {
        if (out.size() >= cap) break;
        out.push_back("What is known about " + head + "?");
    }
    return out;
}

}  // namespace kgcrawl
