#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgcrawl/corpusgen.hpp"
#include "kgcrawl/embed.hpp"

// Attacker-side knowledge graph.
//
// Stores the entities and edges recovered from victim answers, resolves
// surface-form aliases against known entities, and merges near-duplicate
// nodes by embedding similarity. All containers are ordered so that
// iteration, merging and serialization are reproducible run to run.

namespace kgcrawl {

struct schema {
    std::string topic;
    std::vector<std::string> entity_types;
    std::vector<std::string> relation_types;

    bool has_entity_type(const std::string& t) const;
    bool has_relation(const std::string& r) const;
    // Longest entity type T such that `name` starts with "T_"; empty
    // optional when none matches.
    std::optional<std::string> infer_type(const std::string& name) const;
};

// The default desk-scale schema used by the bundled corpora and the CLI
// when a config file does not override it.
schema default_schema();

using entity_id = int;

struct typed_triple {
    std::string head;
    std::string head_type;
    std::string relation;
    std::string tail;
    std::string tail_type;

    auto operator<=>(const typed_triple&) const = default;
};

struct kg_entity {
    entity_id id = 0;
    std::string canonical_name;
    std::string type;
    std::set<std::string> aliases;
    embedding_vector embedding;  // always embed(canonical_name)
    int first_seen_round = 0;
};

struct edge_key {
    entity_id head = 0;
    std::string relation;
    entity_id tail = 0;

    auto operator<=>(const edge_key&) const = default;
};

struct ingest_report {
    int new_entities = 0;
    int new_edges = 0;
    int rejected = 0;
    std::set<entity_id> touched_entities;
    std::set<std::string> touched_types;
};

struct merge_report {
    // (winner, loser) entity ids, in merge order.
    std::vector<std::pair<entity_id, entity_id>> entity_merges;
    // (winner, loser) relation labels relabelled across the edge set.
    std::vector<std::pair<std::string, std::string>> relation_merges;
    std::set<std::string> touched_types;

    bool empty() const { return entity_merges.empty() && relation_merges.empty(); }
};

class knowledge_graph {
public:
    // The embedder must outlive the graph; it supplies entity-name
    // embeddings for alias merging (char n-grams enabled works best).
    knowledge_graph(schema s, const embedder* name_embedder);

    // Adds triples, resolving surface forms against existing aliases.
    // Off-schema relations or types and self loops are counted as
    // rejected. Entity/edge counts never decrease here.
    ingest_report ingest_triples(const std::vector<typed_triple>& triples, int round);

    // Fixpoint merge of same-type entity pairs with cosine >= tau,
    // lowest id pair first; the lower id wins and keeps its canonical
    // name. Also folds relation labels whose embeddings clear the same
    // threshold. `touched` limits candidate pairs to those involving a
    // touched entity (the cheap per-round pass); merge_all scans
    // everything.
    merge_report merge_touched(const std::set<entity_id>& touched, double tau);
    merge_report merge_all(double tau);

    // Structural queries used by scoring.
    int degree(entity_id e) const;
    std::set<std::string> edge_types(entity_id e) const;
    int edge_count(entity_id e, const std::string& relation) const;
    std::vector<entity_id> peers_of_type(const std::string& type) const;
    int max_degree() const;

    const kg_entity& entity(entity_id e) const;
    std::optional<entity_id> find_entity(const std::string& surface_form) const;
    std::size_t entity_count() const { return entities_.size(); }
    std::size_t edge_count_total() const { return edges_.size(); }
    const std::map<entity_id, kg_entity>& entities() const { return entities_; }
    const std::map<edge_key, std::set<int>>& edges() const { return edges_; }
    const schema& graph_schema() const { return schema_; }

    // Edges as plain name triples (canonical forms), sorted.
    std::vector<triple> edge_triples() const;

    nlohmann::json to_json() const;
    static knowledge_graph from_json(const nlohmann::json& j, const embedder* name_embedder);

private:
    entity_id add_entity(const std::string& name, const std::string& type, int round);
    void merge_entities(entity_id winner, entity_id loser);
    void relabel_relation(const std::string& winner, const std::string& loser);

    schema schema_;
    const embedder* embedder_;
    std::map<entity_id, kg_entity> entities_;
    std::map<std::string, entity_id> alias_index_;
    std::map<edge_key, std::set<int>> edges_;  // -> provenance rounds
    std::map<entity_id, std::set<edge_key>> incident_;
    std::map<std::string, std::set<entity_id>> by_type_;
    entity_id next_id_ = 0;
};

}  // namespace kgcrawl
