#include <doctest.h>

#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "kgcrawl/extract.hpp"
#include "kgcrawl/kg.hpp"

using namespace kgcrawl;

TEST_CASE("strict pass accepts exact fact lines only") {
    rule_extractor ex;
    schema s = default_schema();

    auto r = ex.extract_pass(
        "Based on the retrieved records:\n"
        "disease_0 | has_symptom | symptom_2\n"
        "disease_0 | treated_by | treatment_1\n"
        "End of record on disease_0.",
        s);
    REQUIRE(r.triples.size() == 2);
    CHECK(r.rejected == 0);
    CHECK(r.triples[0].head == "disease_0");
    CHECK(r.triples[0].head_type == "disease");
    CHECK(r.triples[0].relation == "has_symptom");
    CHECK(r.triples[0].tail == "symptom_2");
    CHECK(r.triples[0].tail_type == "symptom");

    // sloppy spacing fails the strict grammar
    auto sloppy = ex.extract_pass("disease_0|has_symptom|symptom_2\n"
                                  "disease_0  |  has_symptom  |  symptom_3",
                                  s);
    CHECK(sloppy.triples.empty());
    CHECK(sloppy.rejected == 0);  // not even shape-parsed
}

TEST_CASE("strict pass counts schema violations as rejected") {
    rule_extractor ex;
    schema s = default_schema();

    auto r = ex.extract_pass("disease_0 | invented_by | symptom_2\n"
                             "mystery_9 | has_symptom | symptom_2\n"
                             "disease_0 | has_symptom | symptom_2",
                             s);
    CHECK(r.triples.size() == 1);
    CHECK(r.rejected == 2);
}

TEST_CASE("strict pass deduplicates repeated lines") {
    rule_extractor ex;
    schema s = default_schema();
    auto r = ex.extract_pass("disease_0 | has_symptom | symptom_2\n"
                             "disease_0 | has_symptom | symptom_2",
                             s);
    CHECK(r.triples.size() == 1);
}

TEST_CASE("reflect pass recovers near-miss lines without double counting") {
    rule_extractor ex;
    schema s = default_schema();
    const std::string answer =
        "disease_0 | has_symptom | symptom_2\n"     // strict
        "disease_0|treated_by|treatment_1\n"        // relaxed spacing
        "  disease_1 | HAS_SYMPTOM | symptom_3 \n"  // relaxed case + padding
        "disease_0 | has_symptom | symptom_2 extra | field\n";

    auto strict = ex.extract_pass(answer, s);
    REQUIRE(strict.triples.size() == 1);

    auto reflect = ex.reflect_pass(answer, s, strict.triples);
    REQUIRE(reflect.triples.size() == 2);
    CHECK(reflect.triples[0].relation == "treated_by");
    CHECK(reflect.triples[1].relation == "has_symptom");
    CHECK(reflect.triples[1].head == "disease_1");

    // the combined entry point unions both passes
    auto both = ex.extract(answer, s);
    CHECK(both.triples.size() == 3);
}

TEST_CASE("reflect pass never re-reports strict findings") {
    rule_extractor ex;
    schema s = default_schema();
    // the same fact appears strictly and loosely; reflect must skip it
    auto both = ex.extract("disease_0 | has_symptom | symptom_2\n"
                           "disease_0  |  has_symptom  | symptom_2",
                           s);
    CHECK(both.triples.size() == 1);
}

TEST_CASE("reflect pass rejects what it cannot validate") {
    rule_extractor ex;
    schema s = default_schema();
    auto r = ex.reflect_pass("widget_1|has_symptom|symptom_2\n"
                             "three | pipes | in | here\n"
                             "no pipes at all",
                             s, {});
    CHECK(r.triples.empty());
    CHECK(r.rejected == 1);  // widget_1 shape-parses but fails type inference
}

TEST_CASE("refusal answers produce nothing") {
    rule_extractor ex;
    schema s = default_schema();
    auto r = ex.extract("I cannot help with that request.", s);
    CHECK(r.triples.empty());
    CHECK(r.rejected == 0);
}

TEST_CASE("http extractor round-trips against a local service") {
    httplib::Server server;
    std::atomic<int> calls{0};
    server.Post("/extract", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        auto body = nlohmann::json::parse(req.body);
        // echo back a fixed triple plus one off-schema row the client must drop
        nlohmann::json reply;
        reply["rejected"] = 1;
        reply["triples"] = nlohmann::json::array();
        reply["triples"].push_back({{"head", "disease_4"},
                                    {"relation", "has_symptom"},
                                    {"tail", "symptom_1"}});
        reply["triples"].push_back({{"head", "disease_4"},
                                    {"relation", "summoned_by"},
                                    {"tail", "symptom_1"}});
        if (body.at("task") == "reflect") {
            // repeat a known triple; the client must not duplicate it
            reply["triples"].push_back({{"head", "disease_4"},
                                        {"relation", "has_symptom"},
                                        {"tail", "symptom_1"}});
        }
        res.set_content(reply.dump(), "application/json");
    });

    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    schema s = default_schema();
    http_extractor ex("127.0.0.1", port, 2000, 0);

    auto first = ex.extract_pass("whatever", s);
    CHECK(first.triples.size() == 1);
    CHECK(first.triples[0].head_type == "disease");  // inferred locally
    CHECK(first.rejected == 2);  // service's count plus the off-schema row

    auto reflected = ex.reflect_pass("whatever", s, first.triples);
    CHECK(reflected.triples.empty());  // only duplicates and rejects came back

    server.stop();
    worker.join();
    CHECK(calls.load() == 2);
}

TEST_CASE("http extractor degrades to empty on connection failure") {
    // nothing listens on this port
    http_extractor ex("127.0.0.1", 1, 100, 0);
    schema s = default_schema();
    auto r = ex.extract_pass("disease_0 | has_symptom | symptom_2", s);
    CHECK(r.triples.empty());
    CHECK(r.rejected == 0);
}
