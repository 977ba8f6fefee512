#include "kgcrawl/runner.hpp"

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "kgcrawl/errors.hpp"
#include "kgcrawl/metrics.hpp"
#include "kgcrawl/theory.hpp"

namespace fs = std::filesystem;

namespace kgcrawl {

namespace {

victim_mode mode_from_string(const std::string& name) {
    if (name == "vanilla") return victim_mode::vanilla;
    if (name == "rewrite") return victim_mode::rewrite;
    if (name == "multi_query") return victim_mode::multi_query;
    throw config_error("unknown victim mode '" + name + "'");
}

std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void ensure_dir(const std::string& path) {
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw io_error("cannot create directory " + path + ": " + ec.message());
}

std::string seed_dir_for(const std::string& out_dir, std::uint64_t seed) {
    return out_dir + "/seed_" + std::to_string(seed);
}

void write_run_json(const seed_run_result& r, const std::string& seed_dir) {
    nlohmann::json j;
    j["seed"] = r.seed;
    j["queries_used"] = r.trace.queries_used;
    j["converged"] = r.trace.converged;
    j["coverage"] = r.final_coverage;
    j["kg_entities"] = r.trace.rounds.empty() ? 0 : r.trace.rounds.back().kg_entities;
    j["kg_edges"] = r.trace.rounds.empty() ? 0 : r.trace.rounds.back().kg_edges;
    j["cache_hits"] = r.trace.cache_hits_total;
    j["cache_recomputes"] = r.trace.cache_recomputes_total;
    j["cache_invalidations"] = r.trace.cache_invalidations_total;
    std::ofstream out(seed_dir + "/run.json");
    if (!out) throw io_error("cannot write " + seed_dir + "/run.json");
    out << j.dump(2) << '\n';
}

}  // namespace

run_options options_from_config(const config_map& cfg) {
    run_options opt;

    opt.corpus_path = cfg.get_string("run.corpus", opt.corpus_path);
    opt.out_dir = cfg.get_string("run.out_dir", opt.out_dir);
    opt.threads = static_cast<int>(cfg.get_int("run.threads", opt.threads));
    {
        std::vector<std::int64_t> seeds = cfg.get_int_list("run.seeds", {});
        if (!seeds.empty()) {
            opt.seeds.clear();
            for (std::int64_t s : seeds) opt.seeds.push_back(static_cast<std::uint64_t>(s));
        } else if (cfg.has("run.seed")) {
            opt.seeds = {static_cast<std::uint64_t>(cfg.get_int("run.seed", 1))};
        }
    }

    opt.corpus_seed = static_cast<std::uint64_t>(cfg.get_int("corpus.seed", 42));
    opt.n_entities = static_cast<int>(cfg.get_int("corpus.n_entities", opt.n_entities));
    opt.triples_per_entity =
        static_cast<int>(cfg.get_int("corpus.triples_per_entity", opt.triples_per_entity));
    opt.facts_per_doc = static_cast<int>(cfg.get_int("corpus.facts_per_doc", opt.facts_per_doc));
    opt.p_alias = cfg.get_double("corpus.p_alias", opt.p_alias);

    schema s = default_schema();
    s.topic = cfg.get_string("schema.topic", s.topic);
    s.entity_types = cfg.get_list("schema.entity_types", s.entity_types);
    s.relation_types = cfg.get_list("schema.relation_types", s.relation_types);
    opt.crawl_cfg.graph_schema = s;

    opt.victim_cfg.k = static_cast<int>(cfg.get_int("victim.k", opt.victim_cfg.k));
    opt.victim_cfg.p_leak = cfg.get_double("victim.p_leak", opt.victim_cfg.p_leak);
    opt.victim_cfg.mode = mode_from_string(cfg.get_string("victim.mode", "vanilla"));
    opt.victim_cfg.n_subqueries =
        static_cast<int>(cfg.get_int("victim.n_subqueries", opt.victim_cfg.n_subqueries));
    opt.victim_cfg.rrf_constant = cfg.get_double("victim.rrf_constant", opt.victim_cfg.rrf_constant);
    opt.victim_cfg.refusal_patterns =
        cfg.get_list("victim.refusal_patterns", opt.victim_cfg.refusal_patterns);
    opt.victim_cfg.seed = static_cast<std::uint64_t>(cfg.get_int("victim.seed", 0));

    opt.victim_embedder.dim =
        static_cast<std::size_t>(cfg.get_int("embedder.dim", static_cast<std::int64_t>(256)));
    opt.victim_embedder.seed = static_cast<std::uint64_t>(cfg.get_int("embedder.seed", 0));

    crawl_config& c = opt.crawl_cfg;
    c.budget = static_cast<int>(cfg.get_int("attack.budget", c.budget));
    c.ucb_c = cfg.get_double("attack.ucb_c", c.ucb_c);
    c.window = static_cast<int>(cfg.get_int("attack.window", c.window));
    c.alpha0 = cfg.get_double("attack.alpha0", c.alpha0);
    c.beta = cfg.get_double("attack.beta", c.beta);
    c.sample_top_k = static_cast<int>(cfg.get_int("attack.sample_top_k", c.sample_top_k));
    c.softmax_temperature = cfg.get_double("attack.softmax_temperature", c.softmax_temperature);
    c.relation_percentile = cfg.get_double("attack.relation_percentile", c.relation_percentile);
    c.use_cache = cfg.get_bool("attack.use_cache", c.use_cache);
    c.tau_dup = cfg.get_double("attack.tau_dup", c.tau_dup);
    c.max_trials = static_cast<int>(cfg.get_int("attack.max_trials", c.max_trials));
    c.tau_merge = cfg.get_double("attack.tau_merge", c.tau_merge);
    c.embed_dim = static_cast<std::size_t>(
        cfg.get_int("attack.embed_dim", static_cast<std::int64_t>(c.embed_dim)));

    opt.baseline = cfg.get_string("attack.baseline", opt.baseline);
    opt.extractor_host = cfg.get_string("extractor.host", opt.extractor_host);
    opt.extractor_port = static_cast<int>(cfg.get_int("extractor.port", opt.extractor_port));
    opt.extractor_timeout_ms =
        static_cast<int>(cfg.get_int("extractor.timeout_ms", opt.extractor_timeout_ms));
    return opt;
}

int cmd_gen_corpus(const run_options& opt) {
    if (opt.out_dir.empty()) throw config_error("gen-corpus: out_dir is required");
    ensure_dir(opt.out_dir);
    const schema& s = opt.crawl_cfg.graph_schema;
    const ground_truth_kg kg = generate_ground_truth(opt.corpus_seed, opt.n_entities,
                                                     s.entity_types, s.relation_types,
                                                     opt.triples_per_entity);
    const std::vector<synthetic_doc> docs = render_corpus(kg, opt.facts_per_doc, opt.p_alias);
    write_corpus_jsonl(docs, opt.out_dir + "/corpus.jsonl");

    nlohmann::json truth;
    truth["seed"] = kg.seed;
    auto& ents = truth["entities"] = nlohmann::json::array();
    for (const auto& [name, type] : kg.entities) ents.push_back({{"name", name}, {"type", type}});
    auto& triples = truth["triples"] = nlohmann::json::array();
    for (const triple& t : kg.triples) {
        triples.push_back({{"head", t.head}, {"relation", t.relation}, {"tail", t.tail}});
    }
    std::ofstream out(opt.out_dir + "/ground_truth.json");
    if (!out) throw io_error("cannot write " + opt.out_dir + "/ground_truth.json");
    out << truth.dump(2) << '\n';

    std::cout << "wrote " << docs.size() << " docs to " << opt.out_dir << "/corpus.jsonl\n";
    return 0;
}

seed_run_result run_one_seed(const run_options& opt, std::uint64_t seed,
                             const std::vector<synthetic_doc>& corpus) {
    seed_run_result result;
    result.seed = seed;
    result.corpus_size = corpus.size();

    victim v(corpus, opt.victim_embedder, opt.victim_cfg);

    crawl_config cfg = opt.crawl_cfg;
    cfg.seed = seed;

    std::unique_ptr<http_extractor> http;
    extractor* ex = nullptr;
    if (!opt.extractor_host.empty() && opt.extractor_port > 0) {
        http = std::make_unique<http_extractor>(opt.extractor_host, opt.extractor_port,
                                                opt.extractor_timeout_ms);
        ex = http.get();
    }

    if (opt.baseline.empty()) {
        result.trace = run_attack(v, cfg, ex);
    } else {
        result.trace = run_baseline(v, cfg, baseline_from_string(opt.baseline), ex);
    }
    result.oracle_rounds = v.oracle().rounds();
    result.final_coverage = coverage_rate(v.oracle(), corpus.size());
    return result;
}

void write_seed_artifacts(const seed_run_result& result, const std::string& seed_dir) {
    ensure_dir(seed_dir);
    write_trace_jsonl(result.trace, seed_dir + "/trace.jsonl");
    write_queries_jsonl(result.trace, seed_dir + "/queries.jsonl");
    write_coverage_csv(result.trace, seed_dir + "/coverage.csv");
    write_sched_trace_csv(result.trace, seed_dir + "/sched_trace.csv");
    {
        std::ofstream out(seed_dir + "/kg.json");
        if (!out) throw io_error("cannot write " + seed_dir + "/kg.json");
        out << result.trace.final_kg.dump(2) << '\n';
    }
    {
        retrieval_oracle oracle;
        for (const oracle_round& r : result.oracle_rounds) {
            oracle.record(r.round, r.retrieved, r.refused);
        }
        oracle.write_jsonl(seed_dir + "/oracle.jsonl");
    }
    write_run_json(result, seed_dir);
}

int cmd_attack(const run_options& opt) {
    if (opt.corpus_path.empty()) throw config_error("attack: corpus path is required");
    if (opt.out_dir.empty()) throw config_error("attack: out_dir is required");
    if (opt.seeds.empty()) throw config_error("attack: at least one seed is required");
    ensure_dir(opt.out_dir);

    const std::vector<synthetic_doc> corpus = load_corpus_jsonl(opt.corpus_path);

    std::vector<seed_run_result> results(opt.seeds.size());
    std::vector<std::exception_ptr> failures(opt.seeds.size());

    const int workers =
        std::max(1, std::min<int>(opt.threads, static_cast<int>(opt.seeds.size())));
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex next_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(next_mutex);
                    if (next >= opt.seeds.size()) return;
                    i = next++;
                }
                try {
                    results[i] = run_one_seed(opt, opt.seeds[i], corpus);
                    write_seed_artifacts(results[i], seed_dir_for(opt.out_dir, opt.seeds[i]));
                } catch (...) {
                    failures[i] = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : failures) {
        if (e) std::rethrow_exception(e);
    }

    // Aggregate, in seed order.
    std::ofstream agg(opt.out_dir + "/aggregate.csv");
    if (!agg) throw io_error("cannot write " + opt.out_dir + "/aggregate.csv");
    agg << "seed,queries,converged,coverage,kg_entities,kg_edges,cache_hits,cache_recomputes,"
           "cache_invalidations\n";
    double cov_sum = 0.0;
    for (const seed_run_result& r : results) {
        const auto& last = r.trace.rounds.back();
        agg << r.seed << ',' << r.trace.queries_used << ',' << (r.trace.converged ? 1 : 0) << ','
            << fmt6(r.final_coverage) << ',' << last.kg_entities << ',' << last.kg_edges << ','
            << r.trace.cache_hits_total << ',' << r.trace.cache_recomputes_total << ','
            << r.trace.cache_invalidations_total << '\n';
        cov_sum += r.final_coverage;
    }
    agg << "mean,,," << fmt6(cov_sum / static_cast<double>(results.size())) << ",,,,,\n";

    for (const seed_run_result& r : results) {
        std::cout << "seed " << r.seed << ": coverage " << fmt6(r.final_coverage) << " after "
                  << r.trace.queries_used << " queries"
                  << (r.trace.converged ? " (converged)" : "") << "\n";
    }
    return 0;
}

int cmd_eval(const run_options& opt) {
    if (opt.corpus_path.empty()) throw config_error("eval: corpus path is required");
    if (opt.out_dir.empty()) throw config_error("eval: out_dir is required");
    const std::vector<synthetic_doc> corpus = load_corpus_jsonl(opt.corpus_path);
    const std::vector<std::string> queries = eval_queries_for(corpus);
    const embedder victim_emb(opt.victim_embedder);

    nlohmann::json all = nlohmann::json::array();
    for (std::uint64_t seed : opt.seeds) {
        const std::string seed_dir = seed_dir_for(opt.out_dir, seed);
        if (!fs::exists(seed_dir + "/kg.json")) {
            throw io_error("eval: missing " + seed_dir + "/kg.json (run the attack first)");
        }

        // Rebuild the attacker graph exactly as the run would see it.
        crawl_config cfg = opt.crawl_cfg;
        cfg.seed = seed;
        const embedder entity_emb(attacker_entity_embedder_spec(cfg));
        std::ifstream kg_in(seed_dir + "/kg.json");
        nlohmann::json kg_json;
        kg_in >> kg_json;
        const knowledge_graph g = knowledge_graph::from_json(kg_json, &entity_emb);

        // Oracle log and captured answers.
        retrieval_oracle oracle;
        {
            std::ifstream in(seed_dir + "/oracle.jsonl");
            if (!in) throw io_error("eval: cannot open " + seed_dir + "/oracle.jsonl");
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                const nlohmann::json row = nlohmann::json::parse(line);
                oracle.record(row.at("round").get<int>(),
                              row.at("retrieved").get<std::vector<std::string>>(),
                              row.at("refused").get<bool>());
            }
        }
        std::vector<std::string> snippets;
        {
            std::ifstream in(seed_dir + "/trace.jsonl");
            if (!in) throw io_error("eval: cannot open " + seed_dir + "/trace.jsonl");
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                const nlohmann::json row = nlohmann::json::parse(line);
                if (!row.at("refused").get<bool>()) {
                    snippets.push_back(row.at("answer").get<std::string>());
                }
            }
        }

        const std::set<std::string> covered = oracle.covered_ids();
        std::vector<synthetic_doc> covered_docs;
        for (const synthetic_doc& d : corpus) {
            if (covered.count(d.id)) covered_docs.push_back(d);
        }

        nlohmann::json report;
        report["seed"] = seed;
        report["coverage"] = coverage_rate(oracle, corpus.size());
        report["semantic_fidelity"] = mean_semantic_fidelity(snippets, covered_docs, victim_emb);
        const reconstruction_report rec = reconstruction_fidelity(
            snippets_from_graph(g), corpus, opt.victim_embedder, opt.victim_cfg.k, queries);
        report["reconstruction"] = {{"success_rate", rec.success_rate},
                                    {"answer_similarity", rec.answer_similarity},
                                    {"rouge_l", rec.rouge},
                                    {"n_queries", rec.n_queries}};
        report["kg_entities"] = g.entity_count();
        report["kg_edges"] = g.edge_count_total();

        std::ofstream out(seed_dir + "/report.json");
        if (!out) throw io_error("eval: cannot write " + seed_dir + "/report.json");
        out << report.dump(2) << '\n';
        all.push_back(report);
        std::cout << "seed " << seed << ": coverage " << fmt6(report["coverage"].get<double>())
                  << ", fidelity " << fmt6(report["semantic_fidelity"].get<double>())
                  << ", reconstruction rouge " << fmt6(rec.rouge) << "\n";
    }

    std::ofstream out(opt.out_dir + "/report.json");
    if (!out) throw io_error("eval: cannot write " + opt.out_dir + "/report.json");
    out << all.dump(2) << '\n';
    return 0;
}

int cmd_theory_check(std::ostream& out) {
    const theory_instance inst = default_theory_instance();
    const theory_report props = check_coverage_properties(inst);
    out << "monotonicity: " << (props.monotone ? "PASS" : "FAIL") << " ("
        << props.monotonicity_violations << " violations)\n";
    out << "submodularity: " << (props.submodular ? "PASS" : "FAIL") << " ("
        << props.submodularity_violations << " violations)\n";

    bool all_ok = props.monotone && props.submodular;
    for (int budget = 1; budget <= 4; ++budget) {
        const theory_report r = check_greedy_bound(inst, budget);
        out << "greedy budget " << budget << ": value " << fmt6(r.greedy_value) << " vs optimal "
            << fmt6(r.optimal_value) << " (bound " << fmt6(r.guarantee) << ") "
            << (r.greedy_within_bound ? "PASS" : "FAIL") << "\n";
        all_ok = all_ok && r.greedy_within_bound;
    }
    return all_ok ? 0 : 4;
}

}  // namespace kgcrawl
