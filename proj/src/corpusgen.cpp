#include "kgcrawl/corpusgen.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include <json.hpp>

#include "kgcrawl/errors.hpp"
#include "kgcrawl/rng.hpp"

namespace kgcrawl {

namespace {

// Surface variant used by the alias noise mode. A plain plural keeps the
// type prefix intact so extraction-side type inference still works.
std::string alias_form(const std::string& name) { return name + "s"; }

bool alias_draw(std::uint64_t seed, const std::string& doc_id, std::size_t line_idx,
                const char* slot, const std::string& name, double p_alias) {
    if (p_alias <= 0.0) return false;
    std::string key = "alias|" + doc_id + "|" + std::to_string(line_idx) + "|" + slot + "|" + name;
    return unit_from_bits(hash64(key, seed)) < p_alias;
}

}  // namespace

ground_truth_kg generate_ground_truth(std::uint64_t seed, int n_entities,
                                      const std::vector<std::string>& entity_types,
                                      const std::vector<std::string>& relation_vocab,
                                      int triples_per_entity) {
    if (n_entities <= 0) throw config_error("generate_ground_truth: n_entities must be positive");
    if (entity_types.empty()) throw config_error("generate_ground_truth: no entity types");
    if (relation_vocab.empty()) throw config_error("generate_ground_truth: no relations");
    if (triples_per_entity < 0) {
        throw config_error("generate_ground_truth: triples_per_entity must be >= 0");
    }

    ground_truth_kg kg;
    kg.seed = seed;
    kg.relations = relation_vocab;

    std::map<std::string, int> counters;
    for (int i = 0; i < n_entities; ++i) {
        const std::string& type = entity_types[static_cast<std::size_t>(i) % entity_types.size()];
        kg.entities.emplace_back(type + "_" + std::to_string(counters[type]++), type);
    }

    std::mt19937_64 rng(seed);
    std::set<triple> seen;
    for (const auto& [head, head_type] : kg.entities) {
        for (int j = 0; j < triples_per_entity; ++j) {
            // Bounded retry keeps tiny graphs from spinning once the edge
            // space around a head is exhausted.
            for (int attempt = 0; attempt < 64; ++attempt) {
                const std::string& rel = relation_vocab[uniform_index(rng, relation_vocab.size())];
                const std::string& tail =
                    kg.entities[uniform_index(rng, kg.entities.size())].first;
                if (tail == head) continue;
                triple t{head, rel, tail};
                if (!seen.insert(t).second) continue;
                kg.triples.push_back(std::move(t));
                break;
            }
        }
    }
    return kg;
}

std::string render_fact_line(const triple& t) {
    return t.head + " | " + t.relation + " | " + t.tail;
}

std::vector<synthetic_doc> render_corpus(const ground_truth_kg& kg, int facts_per_doc,
                                         double p_alias) {
    if (facts_per_doc <= 0) throw config_error("render_corpus: facts_per_doc must be positive");
    if (p_alias < 0.0 || p_alias > 1.0) throw config_error("render_corpus: p_alias out of range");

    // Triples grouped by head, preserving generation order within a head.
    std::map<std::string, std::vector<const triple*>> by_head;
    for (const triple& t : kg.triples) by_head[t.head].push_back(&t);

    std::vector<synthetic_doc> docs;
    int doc_counter = 0;
    for (const auto& [name, type] : kg.entities) {
        (void)type;
        auto it = by_head.find(name);
        if (it == by_head.end()) continue;
        const auto& facts = it->second;
        for (std::size_t start = 0; start < facts.size();
             start += static_cast<std::size_t>(facts_per_doc)) {
            synthetic_doc doc;
            char idbuf[16];
            std::snprintf(idbuf, sizeof(idbuf), "doc_%04d", doc_counter);
            doc.id = idbuf;
            doc.title = "Record " + std::to_string(doc_counter) + ": notes on " + name + ".";
            ++doc_counter;

            std::string body;
            const std::size_t stop =
                std::min(facts.size(), start + static_cast<std::size_t>(facts_per_doc));
            for (std::size_t i = start; i < stop; ++i) {
                const triple& canon = *facts[i];
                triple surface = canon;
                const std::size_t line_idx = doc.facts.size();
                if (alias_draw(kg.seed, doc.id, line_idx, "h", canon.head, p_alias)) {
                    surface.head = alias_form(canon.head);
                }
                if (alias_draw(kg.seed, doc.id, line_idx, "t", canon.tail, p_alias)) {
                    surface.tail = alias_form(canon.tail);
                }
                body += render_fact_line(surface);
                body.push_back('\n');
                doc.facts.push_back(std::move(surface));
            }
            doc.text = doc.title + "\n" + body + "End of record on " + name + ".";
            docs.push_back(std::move(doc));
        }
    }
    return docs;
}

void write_corpus_jsonl(const std::vector<synthetic_doc>& docs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("write_corpus_jsonl: cannot open " + path);
    for (const synthetic_doc& doc : docs) {
        nlohmann::json row;
        row["id"] = doc.id;
        row["title"] = doc.title;
        row["text"] = doc.text;
        auto& facts = row["facts"] = nlohmann::json::array();
        for (const triple& t : doc.facts) {
            facts.push_back({{"head", t.head}, {"relation", t.relation}, {"tail", t.tail}});
        }
        out << row.dump() << '\n';
    }
    if (!out) throw io_error("write_corpus_jsonl: write failed for " + path);
}

std::vector<synthetic_doc> load_corpus_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_corpus_jsonl: cannot open " + path);
    std::vector<synthetic_doc> docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw io_error("load_corpus_jsonl: " + path + ":" + std::to_string(lineno) + ": " +
                           e.what());
        }
        synthetic_doc doc;
        doc.id = row.at("id").get<std::string>();
        doc.title = row.value("title", std::string{});
        doc.text = row.at("text").get<std::string>();
        for (const auto& f : row.value("facts", nlohmann::json::array())) {
            doc.facts.push_back(triple{f.at("head").get<std::string>(),
                                       f.at("relation").get<std::string>(),
                                       f.at("tail").get<std::string>()});
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

}  // namespace kgcrawl
