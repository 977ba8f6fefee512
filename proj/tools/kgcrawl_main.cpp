#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kgcrawl/config.hpp"
#include "kgcrawl/errors.hpp"
#include "kgcrawl/runner.hpp"

// Exit codes: 0 success, 2 configuration/usage error, 3 runtime or I/O
// failure, 4 theory-check violation.

int main(int argc, char** argv) {
    CLI::App app{"knowledge-graph guided extraction crawler (desk-scale simulation)"};

    std::string mode;
    std::string config_path;
    std::string corpus_path;
    std::string out_dir;
    std::string baseline;
    std::vector<std::string> overrides;
    std::vector<std::uint64_t> seeds;
    int threads = 0;

    app.add_option("--mode", mode, "gen-corpus | attack | baseline | eval | theory-check")
        ->required();
    app.add_option("--config", config_path, "TOML config file (optional; defaults built in)");
    app.add_option("--corpus", corpus_path, "corpus.jsonl path (attack/baseline/eval)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--baseline", baseline, "random | keyword | continuation");
    app.add_option("--seeds", seeds, "run seeds (overrides config)");
    app.add_option("--threads", threads, "worker threads for per-seed runs");
    app.add_option("--set", overrides, "config override key=value (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        kgcrawl::config_map cfg = config_path.empty()
                                      ? kgcrawl::config_map{}
                                      : kgcrawl::config_map::from_file(config_path);
        for (const std::string& assignment : overrides) {
            cfg.set_override(assignment);
        }

        kgcrawl::run_options opt = kgcrawl::options_from_config(cfg);
        if (!corpus_path.empty()) opt.corpus_path = corpus_path;
        if (!out_dir.empty()) opt.out_dir = out_dir;
        if (!baseline.empty()) opt.baseline = baseline;
        if (!seeds.empty()) opt.seeds = seeds;
        if (threads > 0) opt.threads = threads;

        if (mode == "gen-corpus") {
            return kgcrawl::cmd_gen_corpus(opt);
        }
        if (mode == "attack") {
            opt.baseline.clear();
            return kgcrawl::cmd_attack(opt);
        }
        if (mode == "baseline") {
            if (opt.baseline.empty()) {
                std::cerr << "baseline mode needs --baseline\n";
                return 2;
            }
            return kgcrawl::cmd_attack(opt);
        }
        if (mode == "eval") {
            return kgcrawl::cmd_eval(opt);
        }
        if (mode == "theory-check") {
            return kgcrawl::cmd_theory_check(std::cout);
        }
        std::cerr << "unknown mode '" << mode << "'\n";
        return 2;
    } catch (const kgcrawl::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
