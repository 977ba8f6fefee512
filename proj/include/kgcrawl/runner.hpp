#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kgcrawl/config.hpp"
#include "kgcrawl/crawl.hpp"
#include "kgcrawl/victim.hpp"

// Command layer shared by the CLI binary and the acceptance harness.
//
// Seeds run as independent jobs (own victim, own attacker state) on a
// small thread pool; artifacts land in <out>/seed_<n>/ and are written
// by the worker that owns them, so the output bytes do not depend on
// scheduling. The aggregate is assembled after all workers join, in
// seed order.

namespace kgcrawl {

struct run_options {
    std::string corpus_path;
    std::string out_dir;
    int threads = 1;
    std::vector<std::uint64_t> seeds = {1};

    // corpus generation
    std::uint64_t corpus_seed = 42;
    int n_entities = 50;
    int triples_per_entity = 6;
    int facts_per_doc = 3;
    double p_alias = 0.0;

    // victim
    victim_config victim_cfg;
    embedder_spec victim_embedder;

    // attack (seed field is overwritten per run seed)
    crawl_config crawl_cfg;
    std::string baseline;  // empty = guided attack

    // optional external extraction service
    std::string extractor_host;
    int extractor_port = 0;
    int extractor_timeout_ms = 2000;
};

// Reads every recognized key; unknown keys in known sections raise.
run_options options_from_config(const config_map& cfg);

int cmd_gen_corpus(const run_options& opt);
int cmd_attack(const run_options& opt);
int cmd_eval(const run_options& opt);
int cmd_theory_check(std::ostream& out);

// Per-seed pieces reused by the acceptance tests.
struct seed_run_result {
    std::uint64_t seed = 0;
    crawl_trace trace;
    std::vector<oracle_round> oracle_rounds;
    double final_coverage = 0.0;
    std::size_t corpus_size = 0;
};
seed_run_result run_one_seed(const run_options& opt, std::uint64_t seed,
                             const std::vector<synthetic_doc>& corpus);
void write_seed_artifacts(const seed_run_result& result, const std::string& seed_dir);

}  // namespace kgcrawl
