#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

// Synthetic corpus generation.
//
// A ground-truth graph is sampled first, then rendered into small
// documents whose fact lines follow a fixed "head | relation | tail"
// grammar. The graph is the evaluation reference: coverage and
// reconstruction metrics compare what an attacker rebuilt against what
// was planted here.

namespace kgcrawl {

struct triple {
    std::string head;
    std::string relation;
    std::string tail;

    auto operator<=>(const triple&) const = default;
};

struct ground_truth_kg {
    // (name, type) pairs in creation order; names are "<type>_<i>".
    std::vector<std::pair<std::string, std::string>> entities;
    std::vector<std::string> relations;
    std::vector<triple> triples;
    std::uint64_t seed = 0;
};

struct synthetic_doc {
    std::string id;
    std::string title;
    std::string text;
    // Facts as rendered into the text, surface forms included. With alias
    // noise these may differ from the canonical ground-truth triples.
    std::vector<triple> facts;
};

// Samples entities round-robin over `entity_types` and draws
// `triples_per_entity` outgoing edges per entity (no self loops, no
// duplicate edges). Same arguments, same graph, always.
ground_truth_kg generate_ground_truth(std::uint64_t seed, int n_entities,
                                      const std::vector<std::string>& entity_types,
                                      const std::vector<std::string>& relation_vocab,
                                      int triples_per_entity);

// Groups each entity's facts into documents of at most `facts_per_doc`.
// With p_alias > 0, fact-line mentions are replaced by a suffix variant
// of the name with that (seeded) probability; the ground truth stays
// canonical and doc.facts records the surface forms actually rendered.
std::vector<synthetic_doc> render_corpus(const ground_truth_kg& kg, int facts_per_doc,
                                         double p_alias = 0.0);

std::string render_fact_line(const triple& t);

void write_corpus_jsonl(const std::vector<synthetic_doc>& docs, const std::string& path);
std::vector<synthetic_doc> load_corpus_jsonl(const std::string& path);

}  // namespace kgcrawl
