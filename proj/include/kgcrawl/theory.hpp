#pragma once

#include <set>
#include <string>
#include <vector>

#include "kgcrawl/corpusgen.hpp"
#include "kgcrawl/embed.hpp"

// Structural checks for the coverage objective.
//
// With a deterministic victim, f(S) = |union of D_k(q) for q in S| / |D|
// over a fixed query pool. The instance here is small enough to check
// monotonicity and submodularity by exhaustive subset enumeration, and
// to compare greedy selection against the true optimum. These are the
// properties the adaptive policy's guarantee rests on, checked on the
// ground instead of assumed.

namespace kgcrawl {

struct theory_instance {
    std::vector<synthetic_doc> corpus;
    std::vector<std::string> query_pool;
    embedder_spec espec;
    int k = 3;
};

// Fixed 10-doc / 8-query instance used by the CLI check and tests.
theory_instance default_theory_instance();

// D_k(q) per pool query, in pool order.
std::vector<std::set<std::string>> retrieval_sets(const theory_instance& inst);

// |union of sets[i] for i in subset| / n_docs
double coverage_value(const std::vector<std::set<std::string>>& sets,
                      const std::vector<int>& subset, std::size_t n_docs);

struct theory_report {
    bool monotone = false;
    bool submodular = false;
    int monotonicity_violations = 0;
    int submodularity_violations = 0;
    double greedy_value = 0.0;
    double optimal_value = 0.0;
    double guarantee = 0.0;  // (1 - 1/e) * optimal
    bool greedy_within_bound = false;
    int budget = 0;
};

// Exhaustive monotonicity + submodularity check over every subset pair.
theory_report check_coverage_properties(const theory_instance& inst);

// Greedy with exact marginal gains vs brute-force optimum at `budget`.
theory_report check_greedy_bound(const theory_instance& inst, int budget);

}  // namespace kgcrawl
