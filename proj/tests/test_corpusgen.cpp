#include <doctest.h>

#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kgcrawl/corpusgen.hpp"
#include "kgcrawl/errors.hpp"

using namespace kgcrawl;

namespace {

const std::vector<std::string> kTypes = {"disease", "symptom", "treatment"};
const std::vector<std::string> kRelations = {"has_symptom", "treated_by", "caused_by"};

}  // namespace

TEST_CASE("ground truth generation is deterministic") {
    auto a = generate_ground_truth(42, 12, kTypes, kRelations, 3);
    auto b = generate_ground_truth(42, 12, kTypes, kRelations, 3);
    CHECK(a.entities == b.entities);
    CHECK(a.triples == b.triples);

    auto c = generate_ground_truth(43, 12, kTypes, kRelations, 3);
    CHECK(a.triples != c.triples);
}

TEST_CASE("entities cycle through types with per-type counters") {
    auto kg = generate_ground_truth(1, 7, kTypes, kRelations, 2);
    REQUIRE(kg.entities.size() == 7);
    CHECK(kg.entities[0] == std::pair<std::string, std::string>{"disease_0", "disease"});
    CHECK(kg.entities[1] == std::pair<std::string, std::string>{"symptom_0", "symptom"});
    CHECK(kg.entities[2] == std::pair<std::string, std::string>{"treatment_0", "treatment"});
    CHECK(kg.entities[3] == std::pair<std::string, std::string>{"disease_1", "disease"});
    CHECK(kg.entities[6] == std::pair<std::string, std::string>{"disease_2", "disease"});
}

TEST_CASE("triples avoid self loops and duplicates") {
    auto kg = generate_ground_truth(5, 20, kTypes, kRelations, 4);
    std::set<triple> seen;
    for (const triple& t : kg.triples) {
        CHECK(t.head != t.tail);
        CHECK(seen.insert(t).second);
        CHECK(std::find(kRelations.begin(), kRelations.end(), t.relation) != kRelations.end());
    }
    CHECK(kg.triples.size() == 20u * 4u);
}

TEST_CASE("corpus documents chunk facts per head") {
    auto kg = generate_ground_truth(42, 9, kTypes, kRelations, 5);
    auto docs = render_corpus(kg, 2);

    // every head entity gets ceil(5/2) = 3 documents
    std::map<std::string, int> per_head;
    for (const auto& d : docs) {
        REQUIRE(!d.facts.empty());
        CHECK(d.facts.size() <= 2);
        per_head[d.facts[0].head]++;
        // all facts in one doc share a head
        for (const auto& f : d.facts) CHECK(f.head == d.facts[0].head);
    }
    CHECK(docs.size() == 9u * 3u);
    for (const auto& [head, n] : per_head) CHECK(n == 3);

    // ids are sequential and zero padded
    CHECK(docs[0].id == "doc_0000");
    CHECK(docs[1].id == "doc_0001");
    CHECK(docs.back().id == "doc_0026");
}

TEST_CASE("documents render facts as pipe-delimited lines") {
    auto kg = generate_ground_truth(42, 6, kTypes, kRelations, 2);
    auto docs = render_corpus(kg, 3);
    REQUIRE(!docs.empty());
    const auto& d = docs[0];
    for (const auto& f : d.facts) {
        CHECK(d.text.find(render_fact_line(f)) != std::string::npos);
    }
    CHECK(render_fact_line({"a", "r", "b"}) == "a | r | b");
    CHECK(d.title.find(d.facts[0].head) != std::string::npos);
}

TEST_CASE("alias noise rewrites surface forms but not the ground truth") {
    auto kg = generate_ground_truth(42, 12, kTypes, kRelations, 4);
    auto clean = render_corpus(kg, 3, 0.0);
    auto noisy = render_corpus(kg, 3, 0.5);
    REQUIRE(clean.size() == noisy.size());

    int aliased = 0;
    std::set<triple> canonical(kg.triples.begin(), kg.triples.end());
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        CHECK(noisy[i].id == clean[i].id);
        for (const triple& f : noisy[i].facts) {
            if (canonical.count(f) == 0) {
                ++aliased;
                // aliases are suffix variants of a canonical name
                bool head_alias = canonical.count({f.head.substr(0, f.head.size() - 1),
                                                   f.relation, f.tail}) > 0;
                bool tail_alias = canonical.count({f.head, f.relation,
                                                   f.tail.substr(0, f.tail.size() - 1)}) > 0;
                bool both = canonical.count({f.head.substr(0, f.head.size() - 1), f.relation,
                                             f.tail.substr(0, f.tail.size() - 1)}) > 0;
                CHECK((head_alias || tail_alias || both));
            }
        }
    }
    CHECK(aliased > 0);

    // same seed, same draws
    auto noisy2 = render_corpus(kg, 3, 0.5);
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        CHECK(noisy[i].text == noisy2[i].text);
    }
}

TEST_CASE("corpus round-trips through jsonl") {
    auto kg = generate_ground_truth(42, 6, kTypes, kRelations, 2);
    auto docs = render_corpus(kg, 2);
    const char* path = "test_corpus_tmp.jsonl";
    write_corpus_jsonl(docs, path);
    auto loaded = load_corpus_jsonl(path);
    REQUIRE(loaded.size() == docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        CHECK(loaded[i].id == docs[i].id);
        CHECK(loaded[i].title == docs[i].title);
        CHECK(loaded[i].text == docs[i].text);
        CHECK(loaded[i].facts == docs[i].facts);
    }
    std::remove(path);
}

TEST_CASE("generation arguments are validated") {
    CHECK_THROWS_AS(generate_ground_truth(1, 0, kTypes, kRelations, 2), config_error);
    CHECK_THROWS_AS(generate_ground_truth(1, 5, {}, kRelations, 2), config_error);
    CHECK_THROWS_AS(generate_ground_truth(1, 5, kTypes, {}, 2), config_error);
    CHECK_THROWS_AS(render_corpus(generate_ground_truth(1, 5, kTypes, kRelations, 2), 0),
                    config_error);

    // a single entity has nothing to link to; the bounded retry gives up
    auto lonely = generate_ground_truth(1, 1, kTypes, kRelations, 2);
    CHECK(lonely.triples.empty());
}
