#include "kgcrawl/theory.hpp"

#include <algorithm>
#include <cmath>

#include "kgcrawl/errors.hpp"
#include "kgcrawl/rng.hpp"

namespace kgcrawl {

namespace {

std::set<std::string> union_of(const std::vector<std::set<std::string>>& sets,
                               unsigned mask) {
    std::set<std::string> out;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (mask & (1u << i)) out.insert(sets[i].begin(), sets[i].end());
    }
    return out;
}

double value_of_mask(const std::vector<std::set<std::string>>& sets, unsigned mask,
                     std::size_t n_docs) {
    return static_cast<double>(union_of(sets, mask).size()) / static_cast<double>(n_docs);
}

}  // namespace

theory_instance default_theory_instance() {
    theory_instance inst;
    const auto kg = generate_ground_truth(
        7, 10, {"disease", "symptom", "treatment"},
        {"has_symptom", "treated_by", "caused_by", "co_occurs_with", "affects", "diagnosed_by"},
        2);
    inst.corpus = render_corpus(kg, 2);
    inst.query_pool = {
        "Tell me about disease.",
        "What are the symptoms associated with disease_0?",
        "Which treatments are recorded for disease_1?",
        "Describe symptom_0, including its affected systems.",
        "Tell me more about treatment_0.",
        "What is known about disease_2?",
        "What are the causes associated with symptom_1?",
        "Give an overview of treatment_1.",
    };
    inst.espec.dim = 256;
    inst.espec.seed = 11;
    inst.k = 3;
    return inst;
}

std::vector<std::set<std::string>> retrieval_sets(const theory_instance& inst) {
    if (inst.query_pool.size() > 20) {
        throw config_error("theory: query pool too large for exhaustive checks");
    }
    const embedder emb(inst.espec);
    vector_index index(inst.espec.dim);
    for (const synthetic_doc& d : inst.corpus) index.add(d.id, emb.embed(d.text));

    std::vector<std::set<std::string>> sets;
    sets.reserve(inst.query_pool.size());
    for (const std::string& q : inst.query_pool) {
        std::set<std::string> ids;
        for (const auto& [id, score] : index.top_k(emb.embed(q), inst.k)) {
            (void)score;
            ids.insert(id);
        }
        sets.push_back(std::move(ids));
    }
    return sets;
}

double coverage_value(const std::vector<std::set<std::string>>& sets,
                      const std::vector<int>& subset, std::size_t n_docs) {
    unsigned mask = 0;
    for (int i : subset) mask |= 1u << i;
    return value_of_mask(sets, mask, n_docs);
}

theory_report check_coverage_properties(const theory_instance& inst) {
    const auto sets = retrieval_sets(inst);
    const std::size_t n = sets.size();
    const std::size_t n_docs = inst.corpus.size();
    const unsigned full = (1u << n) - 1u;

    // f per subset, precomputed once.
    std::vector<double> f(full + 1u);
    for (unsigned mask = 0; mask <= full; ++mask) f[mask] = value_of_mask(sets, mask, n_docs);

    theory_report report;
    for (unsigned mask = 0; mask <= full; ++mask) {
        for (std::size_t q = 0; q < n; ++q) {
            const unsigned bit = 1u << q;
            if (mask & bit) continue;
            if (f[mask | bit] < f[mask] - 1e-12) ++report.monotonicity_violations;
        }
    }

    // Submodularity: for every S subset of T and q outside T,
    // gain(q | S) >= gain(q | T). Subsets of T enumerated by the
    // standard submask walk.
    for (unsigned t_mask = 0; t_mask <= full; ++t_mask) {
        for (unsigned s_mask = t_mask;; s_mask = (s_mask - 1) & t_mask) {
            for (std::size_t q = 0; q < n; ++q) {
                const unsigned bit = 1u << q;
                if (t_mask & bit) continue;
                const double gain_s = f[s_mask | bit] - f[s_mask];
                const double gain_t = f[t_mask | bit] - f[t_mask];
                if (gain_s < gain_t - 1e-12) ++report.submodularity_violations;
            }
            if (s_mask == 0) break;
        }
    }

    report.monotone = report.monotonicity_violations == 0;
    report.submodular = report.submodularity_violations == 0;
    return report;
}

theory_report check_greedy_bound(const theory_instance& inst, int budget) {
    if (budget <= 0 || budget > static_cast<int>(inst.query_pool.size())) {
        throw config_error("theory: budget out of range");
    }
    const auto sets = retrieval_sets(inst);
    const std::size_t n = sets.size();
    const std::size_t n_docs = inst.corpus.size();

    theory_report report = check_coverage_properties(inst);
    report.budget = budget;

    // Greedy with exact marginal gains, lowest pool index on ties.
    unsigned chosen = 0;
    double current = 0.0;
    for (int step = 0; step < budget; ++step) {
        int best_q = -1;
        double best_gain = -1.0;
        for (std::size_t q = 0; q < n; ++q) {
            const unsigned bit = 1u << q;
            if (chosen & bit) continue;
            const double gain = value_of_mask(sets, chosen | bit, n_docs) - current;
            if (gain > best_gain + 1e-15) {
                best_gain = gain;
                best_q = static_cast<int>(q);
            }
        }
        chosen |= 1u << best_q;
        current += best_gain;
    }
    report.greedy_value = value_of_mask(sets, chosen, n_docs);

    // Brute-force optimum over all subsets of exactly `budget` queries.
    const unsigned full = (1u << n) - 1u;
    for (unsigned mask = 0; mask <= full; ++mask) {
        if (__builtin_popcount(mask) != budget) continue;
        report.optimal_value = std::max(report.optimal_value, value_of_mask(sets, mask, n_docs));
    }
    report.guarantee = (1.0 - 1.0 / std::exp(1.0)) * report.optimal_value;
    report.greedy_within_bound = report.greedy_value >= report.guarantee - 1e-12;
    return report;
}

}  // namespace kgcrawl
