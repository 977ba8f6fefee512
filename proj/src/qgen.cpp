#include "kgcrawl/qgen.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "kgcrawl/errors.hpp"
#include "kgcrawl/rng.hpp"

namespace kgcrawl {

namespace {

std::string lower_copy(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string humanize(const std::string& relation) {
    std::string out = relation;
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
}

std::string capitalize(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

constexpr int kProbeVariants = 3;

// Function words and template glue. Everything the rotating templates
// contribute lands here, so a dedup key keeps only entity names and
// relation phrases.
const std::set<std::string>& glue_words() {
    static const std::set<std::string> words = {
        "a",    "about",     "an",   "and",  "are",  "available", "associated",
        "can",  "could",     "describe", "do", "does", "for",     "give",
        "in",   "including", "information", "is",     "it",       "its",
        "linked", "list",    "me",   "more", "of",    "on",       "overview",
        "recorded", "records", "related", "tell",     "the",      "this",
        "to",   "what",      "which", "with", "you"};
    return words;
}

}  // namespace

std::string dedup_key(const std::string& query) {
    const std::vector<std::string> tokens = tokenize(query);
    std::string key;
    for (const std::string& tok : tokens) {
        if (glue_words().count(tok)) continue;
        if (!key.empty()) key += ' ';
        key += tok;
    }
    if (!key.empty()) return key;
    for (const std::string& tok : tokens) {
        if (!key.empty()) key += ' ';
        key += tok;
    }
    return key.empty() ? query : key;
}

embedding_vector dedup_embedding(const embedder& e, const std::string& query) {
    return e.embed(dedup_key(query));
}

void query_history::append(std::string query, embedding_vector vec) {
    queries.push_back(std::move(query));
    embeddings.push_back(std::move(vec));
}

const char* to_string(query_mode mode) {
    switch (mode) {
        case query_mode::bootstrap: return "bootstrap";
        case query_mode::relation_probe: return "relation_probe";
        case query_mode::neighborhood: return "neighborhood";
    }
    return "unknown";
}

query_generator::query_generator(const embedder* query_embedder, qgen_config cfg,
                                 query_realizer* realizer)
    : embedder_(query_embedder), cfg_(std::move(cfg)), realizer_(realizer), rng_(cfg_.seed) {
    if (embedder_ == nullptr) throw config_error("query_generator: embedder is required");
    if (cfg_.max_trials <= 0) throw config_error("query_generator: max_trials must be positive");
    // Signed feature hashing makes negative cosines reachable, so the
    // full [-1, 1] range is a legitimate threshold.
    if (cfg_.tau_dup < -1.0 || cfg_.tau_dup > 1.0) {
        throw config_error("query_generator: tau_dup out of range");
    }
}

std::string query_generator::relation_phrase(const std::string& relation) {
    if (relation == "has_symptom") return "symptoms";
    if (relation == "treated_by") return "treatments";
    if (relation == "caused_by") return "causes";
    if (relation == "co_occurs_with") return "co-occurring conditions";
    if (relation == "affects") return "affected systems";
    if (relation == "diagnosed_by") return "diagnostic methods";
    return "";
}

std::string query_generator::relation_probe_text(const std::string& entity,
                                                 const std::string& relation,
                                                 int variant) const {
    const std::string phrase = relation_phrase(relation);
    if (phrase.empty()) {
        // No curated phrasing; a literal but still grounded fallback.
        return "Tell me about the " + humanize(relation) + " of " + entity + ".";
    }
    // The later variants are deliberately terse. Every non-content word
    // dilutes the entity tokens the retriever matches on, so the shorter
    // phrasings pull the anchor's own documents up the ranking.
    switch (variant % kProbeVariants) {
        case 0: return "What are the " + phrase + " associated with " + entity + "?";
        case 1: return "List the " + phrase + " of " + entity + ".";
        default: return capitalize(phrase) + " of " + entity + "?";
    }
}

std::string query_generator::neighborhood_text(const knowledge_graph& g, entity_id e,
                                               unsigned rotation) const {
    const kg_entity& ent = g.entity(e);
    const auto present = g.edge_types(e);

    // Missing relations, most deficient first, names breaking ties.
    std::vector<std::pair<double, std::string>> missing;
    for (const std::string& r : g.graph_schema().relation_types) {
        if (present.count(r)) continue;
        missing.emplace_back(scheduler::deficit(g, e, r), r);
    }
    std::sort(missing.begin(), missing.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    // Deficits only order relations partially; within a run of equal
    // deficits any order is as good as another, so rotate each run.
    // Without this, an anchor whose deficits are all tied (the common
    // case for a gate-failed anchor) would emit the same two relations
    // forever and stall on the duplicate filter.
    if (rotation != 0) {
        std::size_t lo = 0;
        while (lo < missing.size()) {
            std::size_t hi = lo + 1;
            while (hi < missing.size() && missing[hi].first == missing[lo].first) ++hi;
            std::rotate(missing.begin() + lo, missing.begin() + lo + rotation % (hi - lo),
                        missing.begin() + hi);
            lo = hi;
        }
    }

    auto phrase_of = [](const std::string& r) {
        const std::string p = relation_phrase(r);
        return p.empty() ? humanize(r) : p;
    };
    if (missing.empty()) {
        return "Tell me more about " + ent.canonical_name + ".";
    }
    // A second relation is named only when its deficit says something.
    // Zero-deficit phrases are filler: they add no targeting signal and
    // only dilute the entity tokens the retriever keys on.
    if (missing.size() == 1 || missing[1].first <= 0.0) {
        return "Describe " + ent.canonical_name + ", including its " +
               phrase_of(missing[0].second) + ".";
    }
    return "Describe " + ent.canonical_name + ", including its " + phrase_of(missing[0].second) +
           " and " + phrase_of(missing[1].second) + ".";
}

bool query_generator::is_duplicate(const std::string& query, const query_history& hist) const {
    if (hist.size() == 0) return false;
    const embedding_vector v = dedup_embedding(*embedder_, query);
    for (const embedding_vector& past : hist.embeddings) {
        if (cosine(v, past) >= cfg_.tau_dup) return true;
    }
    return false;
}

bool query_generator::passes_blocklist(const std::string& query) const {
    const std::string lowered = lower_copy(query);
    for (const std::string& phrase : cfg_.blocklist) {
        if (lowered.find(lower_copy(phrase)) != std::string::npos) return false;
    }
    return true;
}

qgen_outcome query_generator::next_query(scheduler& sched, const knowledge_graph& g,
                                         const query_history& hist, int t) {
    for (int trial = 1; trial <= cfg_.max_trials; ++trial) {
        const auto scored = sched.score_all(g, t);
        const entity_id anchor = sched.sample_anchor(scored);
        const auto relation = sched.select_relation(g, anchor);
        const kg_entity& ent = g.entity(anchor);

        generated_query out;
        out.anchor = anchor;
        out.relation = relation;
        out.trials = trial;
        if (relation) {
            out.mode = query_mode::relation_probe;
            const int variant = static_cast<int>(uniform_index(rng_, kProbeVariants));
            out.text = relation_probe_text(ent.canonical_name, *relation, variant);
        } else {
            out.mode = query_mode::neighborhood;
            // 60 divides every tie-run length the schema can produce, so
            // the rotation is unbiased across runs of up to six relations.
            const auto rot = static_cast<unsigned>(uniform_index(rng_, 60));
            out.text = neighborhood_text(g, anchor, rot);
        }

        if (realizer_ != nullptr) {
            std::vector<std::string> neighbors;
            for (const auto& [key, rounds] : g.edges()) {
                (void)rounds;
                if (key.head == anchor) neighbors.push_back(g.entity(key.tail).canonical_name);
                if (key.tail == anchor) neighbors.push_back(g.entity(key.head).canonical_name);
            }
            std::sort(neighbors.begin(), neighbors.end());
            neighbors.erase(std::unique(neighbors.begin(), neighbors.end()), neighbors.end());
            const auto alt = realizer_->realize(ent.canonical_name, relation, neighbors);
            // The realizer is advisory: keep its wording only when it is
            // still grounded in the anchor and safe to send.
            if (alt && passes_blocklist(*alt) &&
                lower_copy(*alt).find(lower_copy(ent.canonical_name)) != std::string::npos) {
                out.text = *alt;
            }
        }

        if (is_duplicate(out.text, hist)) {
            sched.record_penalty(anchor, penalty_reason::duplicate);
            continue;
        }
        out.anchor_score = sched.score_of(g, anchor, t);
        return qgen_outcome{std::move(out)};
    }
    return qgen_outcome{std::nullopt};
}

}  // namespace kgcrawl
