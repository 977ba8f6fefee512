#include "kgcrawl/kg.hpp"

#include <algorithm>

#include "kgcrawl/errors.hpp"

namespace kgcrawl {

bool schema::has_entity_type(const std::string& t) const {
    return std::find(entity_types.begin(), entity_types.end(), t) != entity_types.end();
}

bool schema::has_relation(const std::string& r) const {
    return std::find(relation_types.begin(), relation_types.end(), r) != relation_types.end();
}

std::optional<std::string> schema::infer_type(const std::string& name) const {
    std::optional<std::string> best;
    for (const std::string& t : entity_types) {
        if (name.size() > t.size() + 1 && name.compare(0, t.size(), t) == 0 &&
            name[t.size()] == '_') {
            if (!best || t.size() > best->size()) best = t;
        }
    }
    return best;
}

schema default_schema() {
    schema s;
    s.topic = "disease";
    s.entity_types = {"disease", "symptom", "treatment"};
    s.relation_types = {"has_symptom", "treated_by", "caused_by",
                        "co_occurs_with", "affects", "diagnosed_by"};
    return s;
}

knowledge_graph::knowledge_graph(schema s, const embedder* name_embedder)
    : schema_(std::move(s)), embedder_(name_embedder) {
    if (embedder_ == nullptr) {
        throw config_error("knowledge_graph: name embedder is required");
    }
}

entity_id knowledge_graph::add_entity(const std::string& name, const std::string& type,
                                      int round) {
    kg_entity ent;
    ent.id = next_id_++;
    ent.canonical_name = name;
    ent.type = type;
    ent.aliases.insert(name);
    ent.embedding = embedder_->embed(name);
    ent.first_seen_round = round;
    alias_index_[name] = ent.id;
    by_type_[type].insert(ent.id);
    const entity_id id = ent.id;
    entities_.emplace(id, std::move(ent));
    return id;
}

ingest_report knowledge_graph::ingest_triples(const std::vector<typed_triple>& triples,
                                              int round) {
    ingest_report rep;
    for (const typed_triple& t : triples) {
        if (!schema_.has_relation(t.relation) || !schema_.has_entity_type(t.head_type) ||
            !schema_.has_entity_type(t.tail_type) || t.head.empty() || t.tail.empty() ||
            t.head == t.tail) {
            ++rep.rejected;
            continue;
        }

        auto resolve = [&](const std::string& name, const std::string& type) {
            auto it = alias_index_.find(name);
            if (it != alias_index_.end()) return it->second;
            const entity_id id = add_entity(name, type, round);
            ++rep.new_entities;
            rep.touched_entities.insert(id);
            rep.touched_types.insert(type);
            return id;
        };
        const entity_id hid = resolve(t.head, t.head_type);
        const entity_id tid = resolve(t.tail, t.tail_type);
        if (hid == tid) {
            // Two surface forms of one already-merged entity.
            ++rep.rejected;
            continue;
        }

        edge_key key{hid, t.relation, tid};
        auto [it, inserted] = edges_.try_emplace(key);
        it->second.insert(round);
        if (inserted) {
            ++rep.new_edges;
            incident_[hid].insert(key);
            incident_[tid].insert(key);
            rep.touched_entities.insert(hid);
            rep.touched_entities.insert(tid);
            rep.touched_types.insert(entities_.at(hid).type);
            rep.touched_types.insert(entities_.at(tid).type);
        }
    }
    return rep;
}

void knowledge_graph::merge_entities(entity_id winner, entity_id loser) {
    kg_entity& w = entities_.at(winner);
    kg_entity& l = entities_.at(loser);
    w.aliases.insert(l.aliases.begin(), l.aliases.end());
    w.first_seen_round = std::min(w.first_seen_round, l.first_seen_round);
    for (const std::string& alias : l.aliases) alias_index_[alias] = winner;
    by_type_[l.type].erase(loser);

    const std::set<edge_key> incident = incident_[loser];
    for (const edge_key& key : incident) {
        std::set<int> rounds = std::move(edges_.at(key));
        edges_.erase(key);
        incident_[key.head].erase(key);
        incident_[key.tail].erase(key);

        edge_key moved = key;
        if (moved.head == loser) moved.head = winner;
        if (moved.tail == loser) moved.tail = winner;
        if (moved.head == moved.tail) continue;  // edge between the two merged forms

        auto [it, inserted] = edges_.try_emplace(moved);
        (void)inserted;
        it->second.insert(rounds.begin(), rounds.end());
        incident_[moved.head].insert(moved);
        incident_[moved.tail].insert(moved);
    }
    incident_.erase(loser);
    entities_.erase(loser);
}

void knowledge_graph::relabel_relation(const std::string& winner, const std::string& loser) {
    std::vector<edge_key> to_move;
    for (const auto& [key, rounds] : edges_) {
        (void)rounds;
        if (key.relation == loser) to_move.push_back(key);
    }
    for (const edge_key& key : to_move) {
        std::set<int> rounds = std::move(edges_.at(key));
        edges_.erase(key);
        incident_[key.head].erase(key);
        incident_[key.tail].erase(key);

        edge_key moved = key;
        moved.relation = winner;
        auto [it, inserted] = edges_.try_emplace(moved);
        (void)inserted;
        it->second.insert(rounds.begin(), rounds.end());
        incident_[moved.head].insert(moved);
        incident_[moved.tail].insert(moved);
    }
}

merge_report knowledge_graph::merge_touched(const std::set<entity_id>& touched, double tau) {
    merge_report rep;
    std::set<entity_id> frontier = touched;

    // Lowest-id candidate pair first, repeated until nothing clears the
    // threshold. Candidates must share a type and involve the frontier.
    for (;;) {
        std::optional<std::pair<entity_id, entity_id>> best;
        for (const auto& [type, members] : by_type_) {
            (void)type;
            for (auto ai = members.begin(); ai != members.end(); ++ai) {
                for (auto bi = std::next(ai); bi != members.end(); ++bi) {
                    if (!frontier.count(*ai) && !frontier.count(*bi)) continue;
                    if (best && std::pair{*ai, *bi} >= *best) continue;
                    const double sim =
                        cosine(entities_.at(*ai).embedding, entities_.at(*bi).embedding);
                    if (sim >= tau) best = {*ai, *bi};
                }
            }
        }
        if (!best) break;
        const auto [winner, loser] = *best;
        rep.touched_types.insert(entities_.at(winner).type);
        merge_entities(winner, loser);
        rep.entity_merges.emplace_back(winner, loser);
        frontier.erase(loser);
        frontier.insert(winner);
    }

    // Relation labels are few; scan them all each pass.
    for (;;) {
        std::set<std::string> labels;
        for (const auto& [key, rounds] : edges_) {
            (void)rounds;
            labels.insert(key.relation);
        }
        std::optional<std::pair<std::string, std::string>> best;
        for (auto ai = labels.begin(); ai != labels.end(); ++ai) {
            for (auto bi = std::next(ai); bi != labels.end(); ++bi) {
                if (best && std::pair{*ai, *bi} >= *best) continue;
                if (cosine(embedder_->embed(*ai), embedder_->embed(*bi)) >= tau) {
                    best = {*ai, *bi};
                }
            }
        }
        if (!best) break;
        for (const auto& [key, rounds] : edges_) {
            (void)rounds;
            if (key.relation == best->second) {
                rep.touched_types.insert(entities_.at(key.head).type);
                rep.touched_types.insert(entities_.at(key.tail).type);
            }
        }
        relabel_relation(best->first, best->second);
        rep.relation_merges.push_back(*best);
    }
    return rep;
}

merge_report knowledge_graph::merge_all(double tau) {
    std::set<entity_id> all;
    for (const auto& [id, ent] : entities_) {
        (void)ent;
        all.insert(id);
    }
    return merge_touched(all, tau);
}

int knowledge_graph::degree(entity_id e) const {
    auto it = incident_.find(e);
    return it == incident_.end() ? 0 : static_cast<int>(it->second.size());
}

std::set<std::string> knowledge_graph::edge_types(entity_id e) const {
    std::set<std::string> out;
    auto it = incident_.find(e);
    if (it == incident_.end()) return out;
    for (const edge_key& key : it->second) out.insert(key.relation);
    return out;
}

int knowledge_graph::edge_count(entity_id e, const std::string& relation) const {
    auto it = incident_.find(e);
    if (it == incident_.end()) return 0;
    int n = 0;
    for (const edge_key& key : it->second) {
        if (key.relation == relation) ++n;
    }
    return n;
}

std::vector<entity_id> knowledge_graph::peers_of_type(const std::string& type) const {
    auto it = by_type_.find(type);
    if (it == by_type_.end()) return {};
    return {it->second.begin(), it->second.end()};
}

int knowledge_graph::max_degree() const {
    int best = 0;
    for (const auto& [id, ent] : entities_) {
        (void)ent;
        best = std::max(best, degree(id));
    }
    return best;
}

const kg_entity& knowledge_graph::entity(entity_id e) const {
    auto it = entities_.find(e);
    if (it == entities_.end()) {
        throw unknown_entity_error("knowledge_graph: unknown entity id " + std::to_string(e));
    }
    return it->second;
}

std::optional<entity_id> knowledge_graph::find_entity(const std::string& surface_form) const {
    auto it = alias_index_.find(surface_form);
    if (it == alias_index_.end()) return std::nullopt;
    return it->second;
}

std::vector<triple> knowledge_graph::edge_triples() const {
    std::vector<triple> out;
    out.reserve(edges_.size());
    for (const auto& [key, rounds] : edges_) {
        (void)rounds;
        out.push_back(triple{entities_.at(key.head).canonical_name, key.relation,
                             entities_.at(key.tail).canonical_name});
    }
    std::sort(out.begin(), out.end());
    return out;
}

nlohmann::json knowledge_graph::to_json() const {
    nlohmann::json j;
    j["schema"] = {{"topic", schema_.topic},
                   {"entity_types", schema_.entity_types},
                   {"relation_types", schema_.relation_types}};
    auto& ents = j["entities"] = nlohmann::json::array();
    for (const auto& [id, ent] : entities_) {
        ents.push_back({{"id", id},
                        {"name", ent.canonical_name},
                        {"type", ent.type},
                        {"aliases", std::vector<std::string>(ent.aliases.begin(),
                                                             ent.aliases.end())},
                        {"first_seen_round", ent.first_seen_round}});
    }
    auto& edges = j["edges"] = nlohmann::json::array();
    for (const auto& [key, rounds] : edges_) {
        edges.push_back({{"head", key.head},
                         {"relation", key.relation},
                         {"tail", key.tail},
                         {"rounds", std::vector<int>(rounds.begin(), rounds.end())}});
    }
    return j;
}

knowledge_graph knowledge_graph::from_json(const nlohmann::json& j,
                                           const embedder* name_embedder) {
    schema s;
    s.topic = j.at("schema").at("topic").get<std::string>();
    s.entity_types = j.at("schema").at("entity_types").get<std::vector<std::string>>();
    s.relation_types = j.at("schema").at("relation_types").get<std::vector<std::string>>();
    knowledge_graph g(std::move(s), name_embedder);

    for (const auto& ent : j.at("entities")) {
        kg_entity e;
        e.id = ent.at("id").get<entity_id>();
        e.canonical_name = ent.at("name").get<std::string>();
        e.type = ent.at("type").get<std::string>();
        for (const auto& a : ent.at("aliases")) e.aliases.insert(a.get<std::string>());
        e.first_seen_round = ent.at("first_seen_round").get<int>();
        e.embedding = name_embedder->embed(e.canonical_name);
        if (g.entities_.count(e.id)) {
            throw io_error("knowledge_graph: duplicate entity id in import");
        }
        for (const std::string& alias : e.aliases) {
            if (g.alias_index_.count(alias)) {
                throw io_error("knowledge_graph: alias '" + alias + "' bound twice in import");
            }
            g.alias_index_[alias] = e.id;
        }
        g.by_type_[e.type].insert(e.id);
        g.next_id_ = std::max(g.next_id_, e.id + 1);
        g.entities_.emplace(e.id, std::move(e));
    }
    for (const auto& edge : j.at("edges")) {
        edge_key key{edge.at("head").get<entity_id>(), edge.at("relation").get<std::string>(),
                     edge.at("tail").get<entity_id>()};
        if (!g.entities_.count(key.head) || !g.entities_.count(key.tail)) {
            throw io_error("knowledge_graph: edge references unknown entity in import");
        }
        auto& rounds = g.edges_[key];
        for (const auto& r : edge.at("rounds")) rounds.insert(r.get<int>());
        g.incident_[key.head].insert(key);
        g.incident_[key.tail].insert(key);
    }
    return g;
}

}  // namespace kgcrawl
