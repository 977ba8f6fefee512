#include "kgcrawl/sched.hpp"

#include <algorithm>
#include <cmath>

#include "kgcrawl/errors.hpp"
#include "kgcrawl/rng.hpp"

namespace kgcrawl {

namespace {

constexpr double kDegreeEps = 1e-9;

}  // namespace

scheduler::scheduler(sched_config cfg) : cfg_(cfg), rng_(cfg.seed) {
    if (cfg_.window <= 0) throw config_error("scheduler: window must be positive");
    if (cfg_.budget <= 0) throw config_error("scheduler: budget must be positive");
    if (cfg_.sample_top_k <= 0) throw config_error("scheduler: sample_top_k must be positive");
    if (cfg_.softmax_temperature <= 0.0) {
        throw config_error("scheduler: softmax temperature must be positive");
    }
    if (cfg_.relation_percentile < 0.0 || cfg_.relation_percentile > 1.0) {
        throw config_error("scheduler: relation percentile out of range");
    }
}

double scheduler::degree_score(const knowledge_graph& g, entity_id e, int max_degree) {
    return 1.0 - static_cast<double>(g.degree(e)) / (static_cast<double>(max_degree) + kDegreeEps);
}

double scheduler::deficit(const knowledge_graph& g, entity_id e, const std::string& relation) {
    const auto present = g.edge_types(e);
    if (present.count(relation)) return 0.0;
    const std::vector<entity_id> peers = g.peers_of_type(g.entity(e).type);
    // peers always contains e itself, so the denominator is never zero.
    double sum = 0.0;
    for (entity_id u : peers) sum += g.edge_count(u, relation);
    return sum / static_cast<double>(peers.size());
}

double scheduler::adjacency_score(const knowledge_graph& g, entity_id e) {
    double best = 0.0;
    for (const std::string& r : g.graph_schema().relation_types) {
        best = std::max(best, deficit(g, e, r));
    }
    return best;
}

double scheduler::mean_gain(entity_id e) const {
    auto it = stats_.find(e);
    if (it == stats_.end() || it->second.pulls == 0) return 0.0;
    double sum = 0.0;
    for (double s : it->second.gain_samples) sum += s;
    return sum / static_cast<double>(it->second.pulls);
}

double scheduler::empirical_payoff(entity_id e) const {
    auto it = stats_.find(e);
    const int pulls = it == stats_.end() ? 0 : it->second.pulls;
    const double n_total = static_cast<double>(std::max<long long>(total_pulls_, 1));
    const double bonus = cfg_.ucb_c * std::sqrt(std::log(n_total) / (pulls + 1));
    return mean_gain(e) + bonus;
}

double scheduler::alpha_at(int t) const {
    const double progress =
        std::min(1.0, static_cast<double>(t) / static_cast<double>(cfg_.budget));
    return cfg_.alpha0 + (1.0 - cfg_.alpha0) * progress;
}

score_parts scheduler::assemble(const knowledge_graph& g, entity_id e, int t, int max_degree,
                                double adjacency) const {
    score_parts parts;
    parts.empirical_payoff = empirical_payoff(e);
    parts.graph_prior = degree_score(g, e, max_degree) + adjacency;
    parts.score = alpha_at(t) * parts.empirical_payoff + cfg_.beta * parts.graph_prior;
    return parts;
}

double scheduler::cached_adjacency(const knowledge_graph& g, entity_id e) {
    if (!cfg_.use_cache) {
        ++cache_recomputes_;
        return adjacency_score(g, e);
    }
    cache_slot& slot = cache_[e];
    if (slot.valid) {
        ++cache_hits_;
        return slot.adjacency;
    }
    slot.adjacency = adjacency_score(g, e);
    slot.valid = true;
    ++cache_recomputes_;
    return slot.adjacency;
}

score_parts scheduler::score_of(const knowledge_graph& g, entity_id e, int t) {
    return assemble(g, e, t, g.max_degree(), cached_adjacency(g, e));
}

score_parts scheduler::score_of_fresh(const knowledge_graph& g, entity_id e, int t) const {
    return assemble(g, e, t, g.max_degree(), adjacency_score(g, e));
}

std::vector<std::pair<entity_id, double>> scheduler::score_all(const knowledge_graph& g, int t) {
    const int max_degree = g.max_degree();
    std::vector<std::pair<entity_id, double>> out;
    out.reserve(g.entity_count());
    for (const auto& [id, ent] : g.entities()) {
        (void)ent;
        out.emplace_back(id, assemble(g, id, t, max_degree, cached_adjacency(g, id)).score);
    }
    return out;
}

entity_id scheduler::sample_anchor(const std::vector<std::pair<entity_id, double>>& scored) {
    if (scored.empty()) {
        throw empty_candidates_error("scheduler: no entities to sample from");
    }
    std::vector<std::pair<entity_id, double>> top(scored.begin(), scored.end());
    std::sort(top.begin(), top.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (top.size() > static_cast<std::size_t>(cfg_.sample_top_k)) {
        top.resize(static_cast<std::size_t>(cfg_.sample_top_k));
    }

    const double smax = top.front().second;
    std::vector<double> weights;
    weights.reserve(top.size());
    double total = 0.0;
    for (const auto& [id, s] : top) {
        (void)id;
        total += std::exp((s - smax) / cfg_.softmax_temperature);
        weights.push_back(total);
    }
    const double u = uniform_real01(rng_) * total;
    for (std::size_t i = 0; i < top.size(); ++i) {
        if (u < weights[i]) return top[i].first;
    }
    return top.back().first;
}

std::optional<std::string> scheduler::select_relation(const knowledge_graph& g,
                                                      entity_id e) const {
    const auto& relations = g.graph_schema().relation_types;
    std::optional<std::string> best_rel;
    double best = 0.0;
    for (const std::string& r : relations) {
        const double d = deficit(g, e, r);
        if (!best_rel || d > best) {
            best_rel = r;
            best = d;
        }
    }
    // Zero deficit means e either has every relation or its type has no
    // mass anywhere; neither is worth a targeted probe.
    if (!best_rel || best <= 0.0) return std::nullopt;

    std::vector<double> all;
    all.reserve(g.entity_count() * relations.size());
    for (const auto& [id, ent] : g.entities()) {
        (void)ent;
        for (const std::string& r : relations) {
            all.push_back(deficit(g, id, r));
        }
    }
    std::sort(all.begin(), all.end());
    std::size_t idx = static_cast<std::size_t>(
        std::floor(cfg_.relation_percentile * static_cast<double>(all.size())));
    if (idx >= all.size()) idx = all.size() - 1;
    const double threshold = all[idx];

    if (best >= threshold) return best_rel;
    return std::nullopt;
}

void scheduler::record_bootstrap(int delta_entities, int delta_edges) {
    window_.emplace_back(delta_entities, delta_edges);
    while (window_.size() > static_cast<std::size_t>(cfg_.window)) window_.pop_front();
}

void scheduler::record_pull(entity_id e, int delta_entities, int delta_edges, bool penalized) {
    window_.emplace_back(delta_entities, delta_edges);
    while (window_.size() > static_cast<std::size_t>(cfg_.window)) window_.pop_front();

    int max_de = 0;
    int max_dr = 0;
    for (const auto& [de, dr] : window_) {
        max_de = std::max(max_de, de);
        max_dr = std::max(max_dr, dr);
    }
    double sample = 0.0;
    if (max_de > 0) sample += static_cast<double>(delta_entities) / max_de;
    if (max_dr > 0) sample += static_cast<double>(delta_edges) / max_dr;

    entity_stats& st = stats_[e];
    st.gain_samples.push_back(sample);
    ++st.pulls;
    if (penalized) ++st.penalties;
    ++total_pulls_;
    invalidate(e);
}

void scheduler::record_outcome(entity_id e, int delta_entities, int delta_edges) {
    record_pull(e, delta_entities, delta_edges, false);
}

void scheduler::record_penalty(entity_id e, penalty_reason why) {
    (void)why;
    record_pull(e, 0, 0, true);
}

void scheduler::invalidate(entity_id e) {
    auto it = cache_.find(e);
    if (it != cache_.end() && it->second.valid) {
        it->second.valid = false;
        ++cache_invalidations_;
    }
}

void scheduler::note_graph_update(const knowledge_graph& g, const ingest_report& ingest,
                                  const merge_report& merges) {
    for (entity_id e : ingest.touched_entities) invalidate(e);

    std::set<std::string> types = ingest.touched_types;
    types.insert(merges.touched_types.begin(), merges.touched_types.end());
    for (const std::string& type : types) {
        for (entity_id u : g.peers_of_type(type)) invalidate(u);
    }

    for (const auto& [winner, loser] : merges.entity_merges) {
        auto it = stats_.find(loser);
        if (it != stats_.end()) {
            entity_stats& w = stats_[winner];
            w.pulls += it->second.pulls;
            w.penalties += it->second.penalties;
            w.gain_samples.insert(w.gain_samples.end(), it->second.gain_samples.begin(),
                                  it->second.gain_samples.end());
            stats_.erase(it);
        }
        invalidate(winner);
        cache_.erase(loser);
    }
}

const entity_stats* scheduler::stats_for(entity_id e) const {
    auto it = stats_.find(e);
    return it == stats_.end() ? nullptr : &it->second;
}

}  // namespace kgcrawl
