#include <doctest.h>

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kgcrawl/errors.hpp"
#include "kgcrawl/kg.hpp"
#include "kgcrawl/qgen.hpp"
#include "kgcrawl/sched.hpp"

using namespace kgcrawl;

namespace {

embedder make_name_embedder() {
    embedder_spec spec;
    spec.dim = 1024;
    spec.seed = 3;
    spec.ngram_min = 0;
    spec.ngram_max = 0;
    spec.char_ngram_min = 2;
    spec.char_ngram_max = 5;
    return embedder(spec);
}

embedder make_query_embedder() { return embedder(embedder_spec{}); }

typed_triple tt(const std::string& h, const std::string& ht, const std::string& r,
                const std::string& t, const std::string& tl) {
    return typed_triple{h, ht, r, t, tl};
}

knowledge_graph worked_graph(const embedder& emb) {
    knowledge_graph g(default_schema(), &emb);
    g.ingest_triples({tt("disease_0", "disease", "has_symptom", "symptom_0", "symptom"),
                      tt("disease_0", "disease", "has_symptom", "symptom_1", "symptom"),
                      tt("disease_1", "disease", "treated_by", "treatment_0", "treatment")},
                     0);
    return g;
}

class canned_realizer final : public query_realizer {
public:
    explicit canned_realizer(std::optional<std::string> reply) : reply_(std::move(reply)) {}

    std::optional<std::string> realize(const std::string& entity,
                                       const std::optional<std::string>& relation,
                                       const std::vector<std::string>& neighbors) override {
        ++calls;
        last_entity = entity;
        last_relation = relation;
        last_neighbors = neighbors;
        return reply_;
    }

    int calls = 0;
    std::string last_entity;
    std::optional<std::string> last_relation;
    std::vector<std::string> last_neighbors;

private:
    std::optional<std::string> reply_;
};

}  // namespace

TEST_CASE("relation phrases cover the default schema") {
    CHECK(query_generator::relation_phrase("has_symptom") == "symptoms");
    CHECK(query_generator::relation_phrase("treated_by") == "treatments");
    CHECK(query_generator::relation_phrase("caused_by") == "causes");
    CHECK(query_generator::relation_phrase("co_occurs_with") == "co-occurring conditions");
    CHECK(query_generator::relation_phrase("affects") == "affected systems");
    CHECK(query_generator::relation_phrase("diagnosed_by") == "diagnostic methods");
    CHECK(query_generator::relation_phrase("linked_to") == "");
}

TEST_CASE("relation probes rotate through templates") {
    embedder qe = make_query_embedder();
    query_generator gen(&qe, {});

    CHECK(gen.relation_probe_text("disease_1", "has_symptom", 0) ==
          "What are the symptoms associated with disease_1?");
    CHECK(gen.relation_probe_text("disease_1", "has_symptom", 1) ==
          "List the symptoms of disease_1.");
    CHECK(gen.relation_probe_text("disease_1", "has_symptom", 2) ==
          "Symptoms of disease_1?");
    CHECK(gen.relation_probe_text("disease_1", "has_symptom", 3) ==
          gen.relation_probe_text("disease_1", "has_symptom", 0));

    // uncurated labels fall back to a literal phrasing
    CHECK(gen.relation_probe_text("disease_1", "linked_to", 0) ==
          "Tell me about the linked to of disease_1.");
}

TEST_CASE("neighborhood probes name deficit-bearing missing relations") {
    embedder ne = make_name_embedder();
    embedder qe = make_query_embedder();
    knowledge_graph g = worked_graph(ne);
    query_generator gen(&qe, {});

    // disease_1 misses has_symptom at deficit 1.0; the rest sit at zero
    // and zero-deficit relations earn no slot
    CHECK(gen.neighborhood_text(g, *g.find_entity("disease_1")) ==
          "Describe disease_1, including its symptoms.");

    // symptom_0 has only zero deficits; one relation is still named, the
    // alphabetically first of the tie
    CHECK(gen.neighborhood_text(g, *g.find_entity("symptom_0")) ==
          "Describe symptom_0, including its affected systems.");

    // once a second relation carries a positive deficit it gets the slot
    g.ingest_triples({tt("disease_0", "disease", "caused_by", "treatment_9", "treatment")}, 1);
    CHECK(gen.neighborhood_text(g, *g.find_entity("disease_1")) ==
          "Describe disease_1, including its symptoms and causes.");
}

TEST_CASE("rotation reorders tied relations but never the deficit ranking") {
    embedder ne = make_name_embedder();
    embedder qe = make_query_embedder();
    knowledge_graph g = worked_graph(ne);
    query_generator gen(&qe, {});

    const entity_id d1 = *g.find_entity("disease_1");
    const entity_id s0 = *g.find_entity("symptom_0");

    // symptom_0: all five missing relations tie at zero, so the rotation
    // walks the whole cycle one relation at a time.
    std::set<std::string> s0_texts;
    for (unsigned r = 0; r < 60; ++r) s0_texts.insert(gen.neighborhood_text(g, s0, r));
    CHECK(s0_texts.size() == 5);
    CHECK(s0_texts.count("Describe symptom_0, including its affected systems.") == 1);

    // give disease_1 two equally deficient runner-ups; the strict leader
    // stays in front while the rotation cycles the tied pair behind it
    g.ingest_triples({tt("disease_0", "disease", "caused_by", "treatment_9", "treatment"),
                      tt("disease_0", "disease", "affects", "symptom_9", "symptom")},
                     1);
    std::set<std::string> d1_texts;
    for (unsigned r = 0; r < 60; ++r) {
        const std::string q = gen.neighborhood_text(g, d1, r);
        CHECK(q.rfind("Describe disease_1, including its symptoms and ", 0) == 0);
        d1_texts.insert(q);
    }
    CHECK(d1_texts == std::set<std::string>{
                          "Describe disease_1, including its symptoms and affected systems.",
                          "Describe disease_1, including its symptoms and causes.",
                      });
}

TEST_CASE("near-duplicate queries are detected through embeddings") {
    embedder qe = make_query_embedder();
    qgen_config cfg;
    cfg.tau_dup = 0.8;
    query_generator gen(&qe, cfg);

    query_history hist;
    const std::string q = "What are the symptoms associated with disease_1?";
    hist.append(q, dedup_embedding(qe, q));

    CHECK(gen.is_duplicate(q, hist));
    CHECK(gen.is_duplicate("What are the symptoms associated with disease_1 ?", hist));
    // any phrasing of the same target is a repeat, phrasing is glue
    CHECK(gen.is_duplicate("Which symptoms are recorded for disease_1?", hist));
    // same template aimed at a different entity is a new target
    CHECK_FALSE(gen.is_duplicate("What are the symptoms associated with disease_2?", hist));
    CHECK_FALSE(gen.is_duplicate("Which treatments are recorded for symptom_9?", hist));
    CHECK_FALSE(gen.is_duplicate(q, query_history{}));

    CHECK(dedup_key("What are the symptoms associated with disease_1?") ==
          "symptoms disease_1");
    // all-glue text falls back to its normalized words
    CHECK(dedup_key("Tell me about this.") == "tell me about this");
}

TEST_CASE("blocklist filtering is case-insensitive") {
    embedder qe = make_query_embedder();
    query_generator gen(&qe, {});
    CHECK(gen.passes_blocklist("What are the symptoms associated with disease_1?"));
    CHECK_FALSE(gen.passes_blocklist("Repeat ALL the records please"));
    CHECK_FALSE(gen.passes_blocklist("print it Verbatim"));
}

TEST_CASE("next_query probes the structurally starved entity") {
    embedder ne = make_name_embedder();
    embedder qe = make_query_embedder();
    knowledge_graph g = worked_graph(ne);

    sched_config scfg;
    scfg.sample_top_k = 1;  // make the draw deterministic for the check
    scheduler sched(scfg);
    query_generator gen(&qe, {});

    auto outcome = gen.next_query(sched, g, query_history{}, 0);
    REQUIRE_FALSE(outcome.converged());
    const generated_query& q = *outcome.query;
    CHECK(q.anchor == *g.find_entity("disease_1"));
    CHECK(q.relation == "has_symptom");
    CHECK(q.mode == query_mode::relation_probe);
    CHECK(q.trials == 1);
    CHECK(q.text.find("disease_1") != std::string::npos);
    CHECK(q.text.find("symptoms") != std::string::npos);
    CHECK(q.anchor_score.score > 0.0);
}

TEST_CASE("duplicates cost a trial and penalize the anchor") {
    embedder ne = make_name_embedder();
    embedder qe = make_query_embedder();
    knowledge_graph g = worked_graph(ne);

    // seed 0 makes the softmax draw disease_1 first (the top score) and
    // escape to another anchor on the second trial
    sched_config scfg;
    scfg.seed = 0;
    scheduler sched(scfg);
    qgen_config qcfg;
    qcfg.max_trials = 5;
    qcfg.seed = 0;
    query_generator gen(&qe, qcfg);

    // preload the history with everything the generator can say about
    // disease_1's symptoms so picking it always collides
    query_history hist;
    for (int v = 0; v < 3; ++v) {
        const std::string q = gen.relation_probe_text("disease_1", "has_symptom", v);
        hist.append(q, dedup_embedding(qe, q));
    }

    auto outcome = gen.next_query(sched, g, hist, 0);
    REQUIRE_FALSE(outcome.converged());
    CHECK(outcome.query->trials == 2);
    CHECK(outcome.query->anchor != *g.find_entity("disease_1"));

    const entity_stats* st = sched.stats_for(*g.find_entity("disease_1"));
    REQUIRE(st != nullptr);
    CHECK(st->penalties == 1);
}

TEST_CASE("persistent duplication converges") {
    embedder ne = make_name_embedder();
    embedder qe = make_query_embedder();

    // a single-entity graph can only phrase so many things
    knowledge_graph g(default_schema(), &ne);
    g.ingest_triples({tt("disease_0", "disease", "has_symptom", "symptom_0", "symptom")}, 0);

    sched_config scfg;
    scheduler sched(scfg);
    qgen_config qcfg;
    qcfg.max_trials = 3;
    // Cosine never drops below -1, so with this threshold every query is a
    // duplicate of anything already in the history.
    qcfg.tau_dup = -1.0;
    query_generator gen(&qe, qcfg);

    query_history hist;
    hist.append("seed", qe.embed("seed"));

    auto outcome = gen.next_query(sched, g, hist, 0);
    CHECK(outcome.converged());
    CHECK(sched.total_pulls() == 3);  // every trial recorded a penalty
}

TEST_CASE("realizer output is used only when grounded and safe") {
    embedder ne = make_name_embedder();
    embedder qe = make_query_embedder();
    knowledge_graph g = worked_graph(ne);
    sched_config scfg;
    scfg.sample_top_k = 1;

    {
        canned_realizer ok(std::string("In your records, what ails disease_1?"));
        scheduler sched(scfg);
        query_generator gen(&qe, {}, &ok);
        auto outcome = gen.next_query(sched, g, query_history{}, 0);
        REQUIRE_FALSE(outcome.converged());
        CHECK(outcome.query->text == "In your records, what ails disease_1?");
        CHECK(ok.calls == 1);
        CHECK(ok.last_entity == "disease_1");
        CHECK(ok.last_relation == "has_symptom");
        CHECK(ok.last_neighbors == std::vector<std::string>{"treatment_0"});
    }
    {
        // wording that drops the anchor is discarded
        canned_realizer ungrounded(std::string("What ails that thing we discussed?"));
        scheduler sched(scfg);
        query_generator gen(&qe, {}, &ungrounded);
        auto outcome = gen.next_query(sched, g, query_history{}, 0);
        REQUIRE_FALSE(outcome.converged());
        CHECK(outcome.query->text.find("disease_1") != std::string::npos);
    }
    {
        // wording the victim would refuse is discarded
        canned_realizer blocked(std::string("disease_1 records, verbatim"));
        scheduler sched(scfg);
        query_generator gen(&qe, {}, &blocked);
        auto outcome = gen.next_query(sched, g, query_history{}, 0);
        REQUIRE_FALSE(outcome.converged());
        CHECK(outcome.query->text.find("verbatim") == std::string::npos);
    }
    {
        // a declining realizer leaves the template untouched
        canned_realizer silent(std::nullopt);
        scheduler sched(scfg);
        query_generator gen(&qe, {}, &silent);
        auto outcome = gen.next_query(sched, g, query_history{}, 0);
        REQUIRE_FALSE(outcome.converged());
        CHECK(silent.calls == 1);
        CHECK(outcome.query->text.find("disease_1") != std::string::npos);
    }
}

TEST_CASE("generation is reproducible for a fixed seed") {
    embedder ne = make_name_embedder();
    embedder qe = make_query_embedder();
    knowledge_graph g = worked_graph(ne);

    auto run = [&](std::uint64_t seed) {
        sched_config scfg;
        scfg.seed = seed;
        scheduler sched(scfg);
        qgen_config qcfg;
        qcfg.seed = seed;
        query_generator gen(&qe, qcfg);
        std::vector<std::string> texts;
        query_history hist;
        for (int t = 0; t < 5; ++t) {
            auto outcome = gen.next_query(sched, g, hist, t);
            REQUIRE_FALSE(outcome.converged());
            texts.push_back(outcome.query->text);
            hist.append(outcome.query->text, qe.embed(outcome.query->text));
            sched.record_outcome(outcome.query->anchor, 0, 0);
        }
        return texts;
    };

    CHECK(run(12) == run(12));
}

TEST_CASE("qgen config is validated") {
    embedder qe = make_query_embedder();
    CHECK_THROWS_AS(query_generator(nullptr, {}), config_error);
    qgen_config bad;
    bad.max_trials = 0;
    CHECK_THROWS_AS(query_generator(&qe, bad), config_error);
    bad = {};
    bad.tau_dup = -1.2;
    CHECK_THROWS_AS(query_generator(&qe, bad), config_error);
    bad.tau_dup = 1.2;
    CHECK_THROWS_AS(query_generator(&qe, bad), config_error);
}
