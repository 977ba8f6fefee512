#include <doctest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "kgcrawl/errors.hpp"
#include "kgcrawl/theory.hpp"

using namespace kgcrawl;

TEST_CASE("the default instance is small and well formed") {
    auto inst = default_theory_instance();
    CHECK(inst.corpus.size() == 10 * 1);  // 2 triples per entity, 2 facts per doc
    CHECK(inst.query_pool.size() == 8);
    CHECK(inst.k == 3);

    auto sets = retrieval_sets(inst);
    REQUIRE(sets.size() == inst.query_pool.size());
    for (const auto& s : sets) {
        CHECK(!s.empty());
        CHECK(s.size() <= 3);
    }
}

TEST_CASE("coverage_value unions retrieval sets") {
    std::vector<std::set<std::string>> sets = {
        {"a", "b"},
        {"b", "c"},
        {"d"},
    };
    CHECK(coverage_value(sets, {}, 10) == 0.0);
    CHECK(coverage_value(sets, {0}, 10) == doctest::Approx(0.2));
    CHECK(coverage_value(sets, {0, 1}, 10) == doctest::Approx(0.3));
    CHECK(coverage_value(sets, {0, 1, 2}, 10) == doctest::Approx(0.4));
    // overlap does not double count
    CHECK(coverage_value(sets, {1, 1}, 10) == doctest::Approx(0.2));
}

TEST_CASE("coverage is monotone and submodular on the default instance") {
    auto report = check_coverage_properties(default_theory_instance());
    CHECK(report.monotone);
    CHECK(report.submodular);
    CHECK(report.monotonicity_violations == 0);
    CHECK(report.submodularity_violations == 0);
}

TEST_CASE("greedy clears the classic approximation bound at every budget") {
    auto inst = default_theory_instance();
    for (int budget = 1; budget <= 4; ++budget) {
        auto report = check_greedy_bound(inst, budget);
        CHECK(report.budget == budget);
        CHECK(report.greedy_within_bound);
        CHECK(report.greedy_value <= report.optimal_value + 1e-12);
        CHECK(report.guarantee == doctest::Approx((1.0 - 1.0 / std::exp(1.0)) *
                                                  report.optimal_value));
        // a legitimate value, not an empty-set artifact
        CHECK(report.greedy_value > 0.0);
    }

    // optimum never decreases with budget
    double last = 0.0;
    for (int budget = 1; budget <= 4; ++budget) {
        auto report = check_greedy_bound(inst, budget);
        CHECK(report.optimal_value >= last - 1e-12);
        last = report.optimal_value;
    }
}

TEST_CASE("budget bounds are enforced") {
    auto inst = default_theory_instance();
    CHECK_THROWS_AS(check_greedy_bound(inst, 0), config_error);
    CHECK_THROWS_AS(check_greedy_bound(inst, 9), config_error);
}

TEST_CASE("oversized query pools are rejected before enumeration") {
    auto inst = default_theory_instance();
    inst.query_pool.resize(8);
    for (int i = 0; i < 13; ++i) inst.query_pool.push_back("filler query " + std::to_string(i));
    CHECK_THROWS_AS(retrieval_sets(inst), config_error);
}
