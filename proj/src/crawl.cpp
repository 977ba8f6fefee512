#include "kgcrawl/crawl.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "kgcrawl/errors.hpp"
#include "kgcrawl/rng.hpp"

namespace kgcrawl {

namespace {

// Generic openers used for round 0 and whenever the graph is still
// empty (nothing extracted yet). Rotating avoids hammering the victim
// with one string while staying scheduler-free.
std::string bootstrap_query(const std::string& topic, int n) {
    switch (n % 4) {
        case 0: return "Tell me about " + topic + ".";
        case 1: return "What information is available about " + topic + "?";
        case 2: return "List the records related to " + topic + ".";
        default: return "Give an overview of " + topic + ".";
    }
}

sched_config scheduler_config(const crawl_config& cfg) {
    sched_config s;
    s.ucb_c = cfg.ucb_c;
    s.window = cfg.window;
    s.alpha0 = cfg.alpha0;
    s.beta = cfg.beta;
    s.sample_top_k = cfg.sample_top_k;
    s.softmax_temperature = cfg.softmax_temperature;
    s.budget = cfg.budget;
    s.relation_percentile = cfg.relation_percentile;
    s.seed = mix64(cfg.seed ^ 0x9d2c61f8b35a07e4ull);
    s.use_cache = cfg.use_cache;
    return s;
}

struct round_accounting {
    ingest_report ingest;
    merge_report merges;
    extraction_result extracted;
};

// Shared per-round tail: extract, ingest, merge. Returns what changed.
round_accounting absorb_answer(const rag_answer& ans, knowledge_graph& g, extractor& ex,
                               const schema& s, double tau_merge, int round) {
    round_accounting acc;
    if (ans.refused) return acc;
    acc.extracted = ex.extract(ans.text, s);
    if (!acc.extracted.triples.empty()) {
        acc.ingest = g.ingest_triples(acc.extracted.triples, round);
        acc.merges = g.merge_touched(acc.ingest.touched_entities, tau_merge);
    }
    return acc;
}

void fill_round_tail(round_record& rec, const round_accounting& acc, const knowledge_graph& g,
                     const rag_answer& ans) {
    rec.refused = ans.refused;
    rec.answer = ans.text;
    rec.extracted = static_cast<int>(acc.extracted.triples.size());
    rec.rejected = acc.extracted.rejected;
    rec.delta_entities = acc.ingest.new_entities;
    rec.delta_edges = acc.ingest.new_edges;
    rec.kg_entities = g.entity_count();
    rec.kg_edges = g.edge_count_total();
}

void join_oracle(crawl_trace& trace, const victim& v) {
    const auto& rounds = v.oracle().rounds();
    std::set<std::string> covered;
    const double denom = static_cast<double>(v.corpus().size());
    for (std::size_t i = 0; i < trace.rounds.size() && i < rounds.size(); ++i) {
        trace.rounds[i].retrieved = rounds[i].retrieved;
        if (!rounds[i].refused) {
            covered.insert(rounds[i].retrieved.begin(), rounds[i].retrieved.end());
        }
        trace.rounds[i].coverage = static_cast<double>(covered.size()) / denom;
    }
}

}  // namespace

embedder_spec attacker_query_embedder_spec(const crawl_config& cfg) {
    embedder_spec spec;
    spec.dim = cfg.embed_dim;
    spec.seed = mix64(cfg.seed ^ 0x71e6a3c9d2b845f1ull);
    return spec;
}

embedder_spec attacker_entity_embedder_spec(const crawl_config& cfg) {
    embedder_spec spec;
    spec.dim = cfg.entity_embed_dim;
    spec.seed = mix64(cfg.seed ^ 0x3c8f5b21a7d4e906ull);
    spec.ngram_min = 0;
    spec.ngram_max = 0;
    spec.char_ngram_min = 2;
    spec.char_ngram_max = 5;
    return spec;
}

const char* to_string(baseline_kind kind) {
    switch (kind) {
        case baseline_kind::random: return "random";
        case baseline_kind::keyword: return "keyword";
        case baseline_kind::continuation: return "continuation";
    }
    return "unknown";
}

baseline_kind baseline_from_string(const std::string& name) {
    if (name == "random") return baseline_kind::random;
    if (name == "keyword") return baseline_kind::keyword;
    if (name == "continuation") return baseline_kind::continuation;
    throw config_error("unknown baseline '" + name + "'");
}

crawl_trace run_attack_loop(answer_endpoint& rag, const crawl_config& cfg, extractor& ex) {
    if (cfg.budget <= 0) throw config_error("run_attack_loop: budget must be positive");

    const embedder query_emb(attacker_query_embedder_spec(cfg));
    const embedder entity_emb(attacker_entity_embedder_spec(cfg));
    knowledge_graph g(cfg.graph_schema, &entity_emb);
    scheduler sched(scheduler_config(cfg));

    qgen_config qcfg;
    qcfg.tau_dup = cfg.tau_dup;
    qcfg.max_trials = cfg.max_trials;
    qcfg.seed = mix64(cfg.seed ^ 0x48b1e7c05f93da62ull);
    query_generator qgen(&query_emb, qcfg);

    query_history hist;
    crawl_trace trace;
    int bootstrap_count = 0;

    for (int round = 0; round < cfg.budget; ++round) {
        round_record rec;
        rec.round = round;

        const long long hits0 = sched.cache_hits();
        const long long rec0 = sched.cache_recomputes();
        const long long inv0 = sched.cache_invalidations();

        std::optional<entity_id> anchor;
        if (g.entity_count() == 0) {
            rec.query = bootstrap_query(cfg.graph_schema.topic, bootstrap_count++);
            rec.mode = to_string(query_mode::bootstrap);
        } else {
            qgen_outcome out = qgen.next_query(sched, g, hist, round);
            if (out.converged()) {
                trace.converged = true;
                break;
            }
            const generated_query& gq = *out.query;
            rec.query = gq.text;
            rec.mode = to_string(gq.mode);
            rec.anchor = g.entity(gq.anchor).canonical_name;
            rec.relation = gq.relation.value_or("");
            rec.trials = gq.trials;
            rec.empirical_payoff = gq.anchor_score.empirical_payoff;
            rec.graph_prior = gq.anchor_score.graph_prior;
            rec.score = gq.anchor_score.score;
            anchor = gq.anchor;
        }

        const rag_answer ans = rag.answer(rec.query);
        ++trace.queries_used;

        const round_accounting acc =
            absorb_answer(ans, g, ex, cfg.graph_schema, cfg.tau_merge, round);

        if (!anchor) {
            sched.record_bootstrap(acc.ingest.new_entities, acc.ingest.new_edges);
        } else if (ans.refused) {
            sched.record_penalty(*anchor, penalty_reason::refusal);
        } else if (acc.extracted.triples.empty()) {
            sched.record_penalty(*anchor, penalty_reason::empty_answer);
        } else {
            sched.record_outcome(*anchor, acc.ingest.new_entities, acc.ingest.new_edges);
        }
        sched.note_graph_update(g, acc.ingest, acc.merges);
        hist.append(rec.query, dedup_embedding(query_emb, rec.query));

        fill_round_tail(rec, acc, g, ans);
        rec.cache_hits = sched.cache_hits() - hits0;
        rec.cache_recomputes = sched.cache_recomputes() - rec0;
        rec.cache_invalidations = sched.cache_invalidations() - inv0;
        trace.rounds.push_back(std::move(rec));
    }

    trace.cache_hits_total = sched.cache_hits();
    trace.cache_recomputes_total = sched.cache_recomputes();
    trace.cache_invalidations_total = sched.cache_invalidations();
    trace.final_kg = g.to_json();
    return trace;
}

crawl_trace run_attack(victim& v, const crawl_config& cfg, extractor* ex) {
    rule_extractor fallback;
    crawl_trace trace = run_attack_loop(v, cfg, ex ? *ex : fallback);
    join_oracle(trace, v);
    return trace;
}

crawl_trace run_baseline(victim& v, const crawl_config& cfg, baseline_kind kind, extractor* ex) {
    if (cfg.budget <= 0) throw config_error("run_baseline: budget must be positive");
    rule_extractor fallback;
    extractor& extraction = ex ? *ex : fallback;

    const embedder entity_emb(attacker_entity_embedder_spec(cfg));
    knowledge_graph g(cfg.graph_schema, &entity_emb);
    std::mt19937_64 rng(mix64(cfg.seed ^ 0x5ad0c4b9e8f13276ull));

    crawl_trace trace;
    std::string last_answer;
    int bootstrap_count = 0;

    for (int round = 0; round < cfg.budget; ++round) {
        round_record rec;
        rec.round = round;
        rec.mode = to_string(kind);

        switch (kind) {
            case baseline_kind::random: {
                if (g.entity_count() == 0) {
                    rec.query = bootstrap_query(cfg.graph_schema.topic, bootstrap_count++);
                } else {
                    // uniform over known entities, id order
                    std::vector<entity_id> ids;
                    ids.reserve(g.entity_count());
                    for (const auto& [id, ent] : g.entities()) {
                        (void)ent;
                        ids.push_back(id);
                    }
                    const entity_id pick = ids[uniform_index(rng, ids.size())];
                    rec.query = "Tell me about " + g.entity(pick).canonical_name + ".";
                }
                break;
            }
            case baseline_kind::keyword: {
                const std::vector<std::string> tokens = tokenize(last_answer);
                if (tokens.empty()) {
                    rec.query = bootstrap_query(cfg.graph_schema.topic, bootstrap_count++);
                } else {
                    rec.query =
                        "What is known about " + tokens[uniform_index(rng, tokens.size())] + "?";
                }
                break;
            }
            case baseline_kind::continuation: {
                // last non-empty line of the previous answer
                std::string last_line;
                const std::size_t end = last_answer.find_last_not_of('\n');
                if (end != std::string::npos) {
                    const std::size_t nl = last_answer.rfind('\n', end);
                    const std::size_t start = nl == std::string::npos ? 0 : nl + 1;
                    last_line = last_answer.substr(start, end - start + 1);
                }
                if (last_line.empty()) {
                    rec.query = bootstrap_query(cfg.graph_schema.topic, bootstrap_count++);
                } else {
                    rec.query = "Tell me more about this: " + last_line;
                }
                break;
            }
        }

        const rag_answer ans = v.answer(rec.query);
        ++trace.queries_used;
        const round_accounting acc =
            absorb_answer(ans, g, extraction, cfg.graph_schema, cfg.tau_merge, round);
        fill_round_tail(rec, acc, g, ans);
        if (!ans.refused) last_answer = ans.text;
        trace.rounds.push_back(std::move(rec));
    }

    trace.final_kg = g.to_json();
    join_oracle(trace, v);
    return trace;
}

void write_trace_jsonl(const crawl_trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("write_trace_jsonl: cannot open " + path);
    for (const round_record& r : trace.rounds) {
        nlohmann::json row;
        row["round"] = r.round;
        row["query"] = r.query;
        row["mode"] = r.mode;
        row["anchor"] = r.anchor;
        row["relation"] = r.relation;
        row["trials"] = r.trials;
        row["refused"] = r.refused;
        row["answer"] = r.answer;
        row["extracted"] = r.extracted;
        row["rejected"] = r.rejected;
        row["delta_entities"] = r.delta_entities;
        row["delta_edges"] = r.delta_edges;
        row["kg_entities"] = r.kg_entities;
        row["kg_edges"] = r.kg_edges;
        row["retrieved"] = r.retrieved;
        row["coverage"] = r.coverage;
        out << row.dump() << '\n';
    }
}

void write_queries_jsonl(const crawl_trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("write_queries_jsonl: cannot open " + path);
    for (const round_record& r : trace.rounds) {
        nlohmann::json row;
        row["round"] = r.round;
        row["query"] = r.query;
        row["anchor"] = r.anchor;
        row["mode"] = r.mode;
        row["trials"] = r.trials;
        out << row.dump() << '\n';
    }
}

void write_coverage_csv(const crawl_trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("write_coverage_csv: cannot open " + path);
    out << "round,queries,coverage\n";
    char buf[64];
    for (const round_record& r : trace.rounds) {
        std::snprintf(buf, sizeof(buf), "%.6f", r.coverage);
        out << r.round << ',' << (r.round + 1) << ',' << buf << '\n';
    }
}

void write_sched_trace_csv(const crawl_trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("write_sched_trace_csv: cannot open " + path);
    out << "round,anchor,relation,delta_entities,delta_edges,empirical_payoff,graph_prior,"
           "score,cache_invalidations,cache_hits\n";
    char buf[192];
    for (const round_record& r : trace.rounds) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g", r.empirical_payoff, r.graph_prior,
                      r.score);
        out << r.round << ',' << r.anchor << ',' << r.relation << ',' << r.delta_entities << ','
            << r.delta_edges << ',' << buf << ',' << r.cache_invalidations << ',' << r.cache_hits
            << '\n';
    }
}

}  // namespace kgcrawl
