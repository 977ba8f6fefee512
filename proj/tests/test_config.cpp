#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "kgcrawl/config.hpp"
#include "kgcrawl/errors.hpp"

using namespace kgcrawl;

TEST_CASE("sections, scalars and comments parse") {
    auto cfg = config_map::from_string(
        "# run settings\n"
        "top_level = 1\n"
        "\n"
        "[victim]\n"
        "k = 10          # retrieval depth\n"
        "p_leak = 0.75\n"
        "mode = \"rewrite\"\n"
        "hardened = true\n"
        "\n"
        "[attack]\n"
        "budget = 300\n");

    CHECK(cfg.get_int("top_level", 0) == 1);
    CHECK(cfg.get_int("victim.k", 0) == 10);
    CHECK(cfg.get_double("victim.p_leak", 0.0) == doctest::Approx(0.75));
    CHECK(cfg.get_string("victim.mode", "") == "rewrite");
    CHECK(cfg.get_bool("victim.hardened", false));
    CHECK(cfg.get_int("attack.budget", 0) == 300);

    CHECK(cfg.has("victim.k"));
    CHECK_FALSE(cfg.has("victim.unknown"));
    CHECK(cfg.get_int("victim.unknown", 42) == 42);
}

TEST_CASE("arrays parse with mixed quoting") {
    auto cfg = config_map::from_string(
        "[run]\n"
        "seeds = [1, 2, 3]\n"
        "patterns = [\"verbatim\", \"repeat all\", \"entire (corpus|database)\"]\n");

    CHECK(cfg.get_int_list("run.seeds", {}) == std::vector<std::int64_t>{1, 2, 3});
    auto patterns = cfg.get_list("run.patterns", {});
    REQUIRE(patterns.size() == 3);
    CHECK(patterns[1] == "repeat all");
    CHECK(patterns[2] == "entire (corpus|database)");

    CHECK(cfg.get_list("run.absent", {"x"}) == std::vector<std::string>{"x"});
}

TEST_CASE("quoted strings support escapes and embedded hashes") {
    auto cfg = config_map::from_string(
        "title = \"line one\\nline two\"\n"
        "path = \"C:\\\\data\"\n"
        "hashy = \"not # a comment\"\n");
    CHECK(cfg.get_string("title", "") == "line one\nline two");
    CHECK(cfg.get_string("path", "") == "C:\\data");
    CHECK(cfg.get_string("hashy", "") == "not # a comment");
}

TEST_CASE("type errors are loud, not silent") {
    auto cfg = config_map::from_string("[a]\nn = twelve\nf = 1.2.3\nb = yes\nl = [1, x]\n");
    CHECK_THROWS_AS(cfg.get_int("a.n", 0), config_error);
    CHECK_THROWS_AS(cfg.get_double("a.f", 0.0), config_error);
    CHECK_THROWS_AS(cfg.get_bool("a.b", false), config_error);
    CHECK_THROWS_AS(cfg.get_int_list("a.l", {}), config_error);
    // ints read fine as doubles, bools do not silently coerce
    auto ok = config_map::from_string("n = 3\n");
    CHECK(ok.get_double("n", 0.0) == 3.0);
}

TEST_CASE("malformed syntax is rejected with location info") {
    CHECK_THROWS_AS(config_map::from_string("just a line\n"), config_error);
    CHECK_THROWS_AS(config_map::from_string("[unclosed\n"), config_error);
    CHECK_THROWS_AS(config_map::from_string("[]\n"), config_error);
    CHECK_THROWS_AS(config_map::from_string("k = \"unterminated\n"), config_error);
    CHECK_THROWS_AS(config_map::from_string("k = [1, 2\n"), config_error);
    CHECK_THROWS_AS(config_map::from_string("k =\n"), config_error);
    CHECK_THROWS_AS(config_map::from_string("bad key! = 1\n"), config_error);

    try {
        config_map::from_string("ok = 1\nbroken line\n");
        FAIL("expected a parse error");
    } catch (const config_error& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
}

TEST_CASE("overrides replace parsed values") {
    auto cfg = config_map::from_string("[victim]\nk = 10\n");
    cfg.set_override("victim.k=25");
    CHECK(cfg.get_int("victim.k", 0) == 25);

    cfg.set_override("victim.mode=\"multi_query\"");
    CHECK(cfg.get_string("victim.mode", "") == "multi_query");

    cfg.set_override("run.seeds=[4, 5]");
    CHECK(cfg.get_int_list("run.seeds", {}) == std::vector<std::int64_t>{4, 5});

    CHECK_THROWS_AS(cfg.set_override("no_equals_sign"), config_error);
}

TEST_CASE("later assignments win, across scalar and list kinds") {
    auto cfg = config_map::from_string("k = 1\nk = 2\n");
    CHECK(cfg.get_int("k", 0) == 2);

    auto flip = config_map::from_string("k = [1, 2]\nk = 3\n");
    CHECK(flip.get_int("k", 0) == 3);
    CHECK(flip.get_list("k", {"gone"}) == std::vector<std::string>{"gone"});
}

TEST_CASE("config files round-trip from disk") {
    const char* path = "test_config_tmp.toml";
    {
        std::ofstream out(path);
        out << "[run]\nthreads = 4\n";
    }
    auto cfg = config_map::from_file(path);
    CHECK(cfg.get_int("run.threads", 1) == 4);
    std::remove(path);

    CHECK_THROWS_AS(config_map::from_file("does_not_exist.toml"), config_error);
}
