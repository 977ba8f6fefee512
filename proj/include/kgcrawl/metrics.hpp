#pragma once

#include <string>
#include <vector>

#include "kgcrawl/corpusgen.hpp"
#include "kgcrawl/embed.hpp"
#include "kgcrawl/kg.hpp"
#include "kgcrawl/victim.hpp"

// Evaluation metrics.
//
// Coverage counts the distinct documents the victim's retriever touched
// in non-refused rounds. Semantic fidelity embeds every captured answer
// and asks, per covered document, how close the nearest answer got.
// Reconstruction fidelity rebuilds a surrogate RAG from the attacker's
// graph and compares its answers with a reference built on the real
// corpus, query by query.

namespace kgcrawl {

double coverage_rate(const retrieval_oracle& oracle, std::size_t corpus_size);

// ROUGE-L F1 over tokens (longest common subsequence based).
double rouge_l(const std::string& reference, const std::string& candidate);

// max over snippets of cosine(E(snippet), E(doc.text))
double semantic_fidelity(const std::vector<std::string>& snippets, const synthetic_doc& doc,
                         const embedder& emb);
// mean of semantic_fidelity over `docs`; 0 when docs is empty
double mean_semantic_fidelity(const std::vector<std::string>& snippets,
                              const std::vector<synthetic_doc>& docs, const embedder& emb);

// One surrogate document per head entity in the reconstructed graph:
// its outgoing edges rendered as fact lines.
std::vector<synthetic_doc> snippets_from_graph(const knowledge_graph& g);

struct reconstruction_report {
    double success_rate = 0.0;      // non-refused, non-empty surrogate answers
    double answer_similarity = 0.0;  // mean cosine vs the reference answers
    double rouge = 0.0;              // mean ROUGE-L vs the reference answers
    int n_queries = 0;
};

// Both sides are evaluated as fresh vanilla readers with full leakage,
// so the comparison isolates what the surrogate corpus contains rather
// than replaying the original victim's leak coin flips.
reconstruction_report reconstruction_fidelity(const std::vector<synthetic_doc>& surrogate_corpus,
                                              const std::vector<synthetic_doc>& true_corpus,
                                              const embedder_spec& espec, int k,
                                              const std::vector<std::string>& eval_queries);

// Deterministic evaluation queries: one per distinct head entity of the
// corpus facts, sorted, capped.
std::vector<std::string> eval_queries_for(const std::vector<synthetic_doc>& corpus,
                                          std::size_t cap = 50);

}  // namespace kgcrawl
