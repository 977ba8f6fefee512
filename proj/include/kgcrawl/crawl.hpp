#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgcrawl/extract.hpp"
#include "kgcrawl/kg.hpp"
#include "kgcrawl/qgen.hpp"
#include "kgcrawl/sched.hpp"
#include "kgcrawl/victim.hpp"

// The crawl loop.
//
// run_attack_loop drives one full budgeted extraction run against
// anything that answers queries. It deliberately takes the narrow
// answer_endpoint interface, so attacker code cannot reach the victim's
// corpus, index or oracle even by accident. run_attack is the harness
// wrapper that owns a concrete victim and joins the oracle's
// ground-truth retrieval log into the trace afterwards for evaluation.
//
// Baselines share the victim, extractor and graph accumulation but
// replace the scheduler/generator with naive query policies, so any
// coverage difference is attributable to guidance alone.

namespace kgcrawl {

struct crawl_config {
    int budget = 1000;
    std::uint64_t seed = 1;
    schema graph_schema = default_schema();

    // scheduler
    double ucb_c = 0.5;
    int window = 50;
    double alpha0 = 0.5;
    double beta = 0.5;
    int sample_top_k = 5;
    double softmax_temperature = 1.0;
    double relation_percentile = 0.9;
    bool use_cache = true;

    // generator
    double tau_dup = 0.8;
    // Convergence fires after this many consecutive duplicate draws.
    // Each duplicate penalizes its anchor and re-scores, so a healthy
    // run burns through a handful of exhausted leaders and recovers;
    // 50 makes convergence mean the whole frontier is spent, not a few
    // unlucky samples from one stale top-K. An anchor that just paid
    // off is the usual offender: it tops the next chart while its only
    // phrasing sits freshly in the history.
    int max_trials = 50;

    // graph maintenance
    double tau_merge = 0.9;

    // attacker embedding spaces
    std::size_t embed_dim = 256;        // queries and dedup
    std::size_t entity_embed_dim = 1024;  // entity names (char n-grams)
};

struct round_record {
    int round = 0;
    std::string query;
    std::string mode;      // bootstrap | relation_probe | neighborhood | baseline policy
    std::string anchor;    // canonical name, empty for bootstrap rounds
    std::string relation;  // empty when none was targeted
    int trials = 1;
    bool refused = false;
    std::string answer;
    int extracted = 0;
    int rejected = 0;
    int delta_entities = 0;
    int delta_edges = 0;
    std::size_t kg_entities = 0;
    std::size_t kg_edges = 0;
    double empirical_payoff = 0.0;
    double graph_prior = 0.0;
    double score = 0.0;
    // per-round deltas of the scheduler's cache counters
    long long cache_hits = 0;
    long long cache_recomputes = 0;
    long long cache_invalidations = 0;
    // filled by the harness join, not visible to the attacker loop
    std::vector<std::string> retrieved;
    double coverage = 0.0;
};

struct crawl_trace {
    std::vector<round_record> rounds;
    bool converged = false;
    int queries_used = 0;
    long long cache_hits_total = 0;
    long long cache_recomputes_total = 0;
    long long cache_invalidations_total = 0;
    nlohmann::json final_kg;
};

enum class baseline_kind { random, keyword, continuation };
const char* to_string(baseline_kind kind);
baseline_kind baseline_from_string(const std::string& name);

// The attacker's two embedding spaces, derived from the run seed: a
// token-level one for queries and dedup, and a character-level one for
// entity names (suffix variants of a name must land near-parallel for
// alias merging; token grams would put them at right angles).
embedder_spec attacker_query_embedder_spec(const crawl_config& cfg);
embedder_spec attacker_entity_embedder_spec(const crawl_config& cfg);

// Attacker-side loop; sees only the query/answer surface.
crawl_trace run_attack_loop(answer_endpoint& rag, const crawl_config& cfg, extractor& ex);

// Harness: runs the loop against a concrete victim, then joins the
// oracle's retrieval log (per-round doc ids and the running coverage)
// into the returned trace. Passing ex = nullptr uses the rule extractor.
crawl_trace run_attack(victim& v, const crawl_config& cfg, extractor* ex = nullptr);
crawl_trace run_baseline(victim& v, const crawl_config& cfg, baseline_kind kind,
                         extractor* ex = nullptr);

void write_trace_jsonl(const crawl_trace& trace, const std::string& path);
void write_queries_jsonl(const crawl_trace& trace, const std::string& path);
void write_coverage_csv(const crawl_trace& trace, const std::string& path);
void write_sched_trace_csv(const crawl_trace& trace, const std::string& path);

}  // namespace kgcrawl
