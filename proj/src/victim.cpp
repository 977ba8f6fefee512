#include "kgcrawl/victim.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

#include "kgcrawl/errors.hpp"
#include "kgcrawl/rng.hpp"

namespace kgcrawl {

namespace {

constexpr const char* kRefusal = "I cannot help with that request.";
constexpr const char* kPreamble = "Based on the retrieved records:";
constexpr const char* kEmptyRewrite = "information";

// Imperative lead-ins stripped during query rewriting, longest first.
const std::vector<std::string>& rewrite_prefixes() {
    static const std::vector<std::string> prefixes = {
        "ignore previous", "tell me", "please", "repeat",
    };
    return prefixes;
}

std::string collapse_ws(const std::string& s) {
    std::string out;
    bool pending = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending = !out.empty();
            continue;
        }
        if (pending) {
            out.push_back(' ');
            pending = false;
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::vector<std::string> default_refusal_patterns() {
    return {"verbatim", "repeat all", "ignore previous", "all documents", "word for word",
            "entire (corpus|database)"};
}

void retrieval_oracle::record(int round, std::vector<std::string> retrieved, bool refused) {
    rounds_.push_back(oracle_round{round, std::move(retrieved), refused});
}

std::set<std::string> retrieval_oracle::covered_ids() const {
    std::set<std::string> out;
    for (const oracle_round& r : rounds_) {
        if (r.refused) continue;
        out.insert(r.retrieved.begin(), r.retrieved.end());
    }
    return out;
}

void retrieval_oracle::write_jsonl(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw io_error("retrieval_oracle: cannot open " + path);
    for (const oracle_round& r : rounds_) {
        nlohmann::json row;
        row["round"] = r.round;
        row["retrieved"] = r.retrieved;
        row["refused"] = r.refused;
        out << row.dump() << '\n';
    }
}

std::vector<std::string> rrf_fuse(const std::vector<std::vector<std::string>>& rankings,
                                  double constant) {
    std::map<std::string, double> scores;
    for (const auto& ranking : rankings) {
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            scores[ranking[i]] += 1.0 / (constant + static_cast<double>(i + 1));
        }
    }
    std::vector<std::pair<std::string, double>> ordered(scores.begin(), scores.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> out;
    out.reserve(ordered.size());
    for (auto& [id, s] : ordered) {
        (void)s;
        out.push_back(id);
    }
    return out;
}

victim::victim(std::vector<synthetic_doc> corpus, const embedder_spec& espec, victim_config cfg)
    : corpus_(std::move(corpus)), embedder_(espec), index_(espec.dim), cfg_(std::move(cfg)) {
    if (corpus_.empty()) throw config_error("victim: corpus is empty");
    if (cfg_.k <= 0) throw config_error("victim: k must be positive");
    if (cfg_.p_leak < 0.0 || cfg_.p_leak > 1.0) throw config_error("victim: p_leak out of range");
    if (cfg_.n_subqueries <= 0) throw config_error("victim: n_subqueries must be positive");

    for (std::size_t i = 0; i < corpus_.size(); ++i) {
        const synthetic_doc& d = corpus_[i];
        if (!doc_pos_.emplace(d.id, i).second) {
            throw config_error("victim: duplicate doc id '" + d.id + "'");
        }
        index_.add(d.id, embedder_.embed(d.text));
    }
    for (const std::string& pattern : cfg_.refusal_patterns) {
        try {
            refusal_res_.emplace_back(pattern,
                                      std::regex_constants::ECMAScript |
                                          std::regex_constants::icase);
        } catch (const std::regex_error& e) {
            throw config_error("victim: bad refusal pattern '" + pattern + "': " + e.what());
        }
    }
}

const char* victim::refusal_text() { return kRefusal; }

const synthetic_doc& victim::doc(const std::string& id) const {
    auto it = doc_pos_.find(id);
    if (it == doc_pos_.end()) throw unknown_entity_error("victim: unknown doc id '" + id + "'");
    return corpus_[it->second];
}

std::vector<std::string> victim::retrieve(const std::string& query, int k) const {
    if (tokenize(query).empty()) {
        throw empty_query_error("victim: empty query");
    }
    const auto scored = index_.top_k(embedder_.embed(query), static_cast<std::size_t>(k));
    std::vector<std::string> ids;
    ids.reserve(scored.size());
    for (const auto& [id, score] : scored) {
        (void)score;
        ids.push_back(id);
    }
    return ids;
}

bool victim::matches_refusal(const std::string& text) const {
    for (const std::regex& re : refusal_res_) {
        if (std::regex_search(text, re)) return true;
    }
    return false;
}

std::string victim::rewrite_query(const std::string& query) const {
    std::string s;
    s.reserve(query.size());
    for (char c : query) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    s = collapse_ws(s);

    // Peel imperative lead-ins until none is left in front.
    for (bool stripped = true; stripped;) {
        stripped = false;
        for (const std::string& prefix : rewrite_prefixes()) {
            if (s.size() < prefix.size() || s.compare(0, prefix.size(), prefix) != 0) continue;
            if (s.size() > prefix.size() && !std::isspace(static_cast<unsigned char>(s[prefix.size()])) &&
                std::isalnum(static_cast<unsigned char>(s[prefix.size()]))) {
                continue;  // prefix is part of a longer word
            }
            s.erase(0, prefix.size());
            while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.front())) ||
                                  s.front() == ',' || s.front() == ':')) {
                s.erase(s.begin());
            }
            stripped = true;
        }
    }

    for (const std::regex& re : refusal_res_) {
        s = std::regex_replace(s, re, " ");
    }
    s = collapse_ws(s);
    if (s.empty()) return kEmptyRewrite;
    return s;
}

std::vector<std::string> victim::subqueries(const std::string& query) const {
    std::vector<std::string> out;
    out.push_back(query);
    // Raw whitespace fields; embedding handles case and punctuation.
    std::vector<std::string> fields;
    std::string cur;
    for (char c : query) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) fields.push_back(std::move(cur));

    for (int v = 1; v < cfg_.n_subqueries; ++v) {
        if (fields.size() < 2) {
            out.push_back(query);
            continue;
        }
        const std::uint64_t h = hash64("subq|" + std::to_string(v) + "|" + query, cfg_.seed);
        const std::size_t drop = static_cast<std::size_t>(h % fields.size());
        std::string variant;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i == drop) continue;
            if (!variant.empty()) variant.push_back(' ');
            variant += fields[i];
        }
        if (tokenize(variant).empty()) variant = query;  // dropped the only real token
        out.push_back(std::move(variant));
    }
    return out;
}

std::vector<std::string> victim::fused_retrieve(const std::string& query) const {
    std::vector<std::vector<std::string>> rankings;
    for (const std::string& sub : subqueries(query)) {
        rankings.push_back(retrieve(sub, cfg_.k));
    }
    std::vector<std::string> fused = rrf_fuse(rankings, cfg_.rrf_constant);
    if (fused.size() > static_cast<std::size_t>(cfg_.k)) {
        fused.resize(static_cast<std::size_t>(cfg_.k));
    }
    return fused;
}

rag_answer victim::generate(const std::string& query, const std::vector<std::string>& doc_ids,
                            int round) const {
    if (matches_refusal(query)) {
        return rag_answer{kRefusal, true};
    }
    std::string text = kPreamble;
    for (const std::string& id : doc_ids) {
        const synthetic_doc& d = doc(id);
        for (std::size_t j = 0; j < d.facts.size(); ++j) {
            const std::string key =
                "leak|" + std::to_string(round) + "|" + id + "|" + std::to_string(j);
            if (unit_from_bits(hash64(key, cfg_.seed)) < cfg_.p_leak) {
                text.push_back('\n');
                text += render_fact_line(d.facts[j]);
            }
        }
    }
    return rag_answer{std::move(text), false};
}

rag_answer victim::answer(const std::string& query) {
    const int round = next_round_;
    std::vector<std::string> ids;
    std::string gen_query = query;
    switch (cfg_.mode) {
        case victim_mode::vanilla:
            ids = retrieve(query, cfg_.k);
            break;
        case victim_mode::rewrite:
            gen_query = rewrite_query(query);
            ids = retrieve(gen_query, cfg_.k);
            break;
        case victim_mode::multi_query:
            ids = fused_retrieve(query);
            break;
    }
    rag_answer ans = generate(gen_query, ids, round);
    oracle_.record(round, std::move(ids), ans.refused);
    ++next_round_;
    return ans;
}

}  // namespace kgcrawl
