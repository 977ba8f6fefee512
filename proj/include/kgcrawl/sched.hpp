#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "kgcrawl/kg.hpp"

// Anchor scheduling.
//
// Each known entity is a bandit arm. Its score blends an empirical
// payoff (mean of window-normalized gains plus a UCB exploration bonus)
// with a graph prior (degree score plus the largest relation deficit).
// The mixing weight on the empirical term ramps up as budget is spent,
// so early rounds lean on structure and late rounds on observed yield.
//
// The relation-deficit aggregate is the expensive part of a score; it is
// cached per entity and invalidated lazily when the graph around the
// entity (or anyone sharing its type) changes. Every other term is cheap
// and evaluated at read time, which keeps cached reads bitwise equal to
// a from-scratch recomputation.

namespace kgcrawl {

enum class penalty_reason { duplicate, refusal, empty_answer };

struct sched_config {
    double ucb_c = 0.5;
    int window = 50;
    double alpha0 = 0.5;          // initial weight on the empirical term
    double beta = 0.5;            // constant weight on the graph prior
    int sample_top_k = 5;
    double softmax_temperature = 1.0;
    int budget = 1000;
    double relation_percentile = 0.9;
    std::uint64_t seed = 0;
    bool use_cache = true;
};

struct entity_stats {
    int pulls = 0;
    std::vector<double> gain_samples;  // one per pull, penalties contribute 0
    int penalties = 0;
};

struct score_parts {
    double empirical_payoff = 0.0;
    double graph_prior = 0.0;
    double score = 0.0;
};

class scheduler {
public:
    explicit scheduler(sched_config cfg);

    // Graph-side terms (stateless).
    static double degree_score(const knowledge_graph& g, entity_id e, int max_degree);
    static double deficit(const knowledge_graph& g, entity_id e, const std::string& relation);
    static double adjacency_score(const knowledge_graph& g, entity_id e);

    double mean_gain(entity_id e) const;
    double empirical_payoff(entity_id e) const;
    double alpha_at(int t) const;

    // Scores every entity in id order. Cache-aware and counted.
    std::vector<std::pair<entity_id, double>> score_all(const knowledge_graph& g, int t);
    score_parts score_of(const knowledge_graph& g, entity_id e, int t);
    // Always recomputes; the reference the cache must agree with.
    score_parts score_of_fresh(const knowledge_graph& g, entity_id e, int t) const;

    // Softmax draw over the top sample_top_k scores. Throws
    // empty_candidates_error on an empty list.
    entity_id sample_anchor(const std::vector<std::pair<entity_id, double>>& scored);

    // Relation whose deficit at e is largest, gated at the configured
    // percentile of all (entity, relation) deficits. nullopt when nothing
    // clears the gate or every deficit at e is zero.
    std::optional<std::string> select_relation(const knowledge_graph& g, entity_id e) const;

    // Round-0 gains enter the window but belong to no arm.
    void record_bootstrap(int delta_entities, int delta_edges);
    void record_outcome(entity_id e, int delta_entities, int delta_edges);
    void record_penalty(entity_id e, penalty_reason why);

    // Applies cache invalidation for a round's graph changes and folds
    // the stats of merged-away entities into their winners.
    void note_graph_update(const knowledge_graph& g, const ingest_report& ingest,
                           const merge_report& merges);

    long long total_pulls() const { return total_pulls_; }
    const entity_stats* stats_for(entity_id e) const;
    long long cache_hits() const { return cache_hits_; }
    long long cache_recomputes() const { return cache_recomputes_; }
    long long cache_invalidations() const { return cache_invalidations_; }
    const sched_config& config() const { return cfg_; }

private:
    struct cache_slot {
        double adjacency = 0.0;
        bool valid = false;
    };

    score_parts assemble(const knowledge_graph& g, entity_id e, int t, int max_degree,
                         double adjacency) const;
    double cached_adjacency(const knowledge_graph& g, entity_id e);
    void invalidate(entity_id e);
    void record_pull(entity_id e, int delta_entities, int delta_edges, bool penalized);

    sched_config cfg_;
    long long total_pulls_ = 0;
    std::deque<std::pair<int, int>> window_;
    std::map<entity_id, entity_stats> stats_;
    std::map<entity_id, cache_slot> cache_;
    std::mt19937_64 rng_;
    long long cache_hits_ = 0;
    long long cache_recomputes_ = 0;
    long long cache_invalidations_ = 0;
};

}  // namespace kgcrawl
