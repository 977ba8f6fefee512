#include "kgcrawl/extract.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace kgcrawl {

namespace {

std::string lower_copy(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim_copy(const std::string& s) {
    std::size_t lo = 0;
    std::size_t hi = s.size();
    while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
    while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
    return s.substr(lo, hi - lo);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

// Shape-level strict match: exactly "head | relation | tail" with single
// spaces around the pipes and no stray whitespace in any field.
std::optional<std::array<std::string, 3>> strict_shape(const std::string& line) {
    const std::string sep = " | ";
    const std::size_t p1 = line.find(sep);
    if (p1 == std::string::npos) return std::nullopt;
    const std::size_t p2 = line.find(sep, p1 + sep.size());
    if (p2 == std::string::npos) return std::nullopt;
    std::array<std::string, 3> parts{line.substr(0, p1),
                                     line.substr(p1 + sep.size(), p2 - p1 - sep.size()),
                                     line.substr(p2 + sep.size())};
    for (const std::string& part : parts) {
        if (part.empty()) return std::nullopt;
        if (part.find('|') != std::string::npos) return std::nullopt;
        if (std::isspace(static_cast<unsigned char>(part.front())) ||
            std::isspace(static_cast<unsigned char>(part.back()))) {
            return std::nullopt;
        }
    }
    return parts;
}

// Relaxed shape: exactly two pipes anywhere, fields trimmed.
std::optional<std::array<std::string, 3>> relaxed_shape(const std::string& line) {
    if (std::count(line.begin(), line.end(), '|') != 2) return std::nullopt;
    const std::size_t p1 = line.find('|');
    const std::size_t p2 = line.find('|', p1 + 1);
    std::array<std::string, 3> parts{trim_copy(line.substr(0, p1)),
                                     trim_copy(line.substr(p1 + 1, p2 - p1 - 1)),
                                     trim_copy(line.substr(p2 + 1))};
    for (const std::string& part : parts) {
        if (part.empty()) return std::nullopt;
    }
    return parts;
}

// Validates a shape-parsed candidate against the schema. The relaxed
// flag additionally forgives relation case.
std::optional<typed_triple> validate(const std::array<std::string, 3>& parts, const schema& s,
                                     bool relaxed) {
    std::string relation = parts[1];
    if (!s.has_relation(relation)) {
        if (!relaxed) return std::nullopt;
        const std::string lowered = lower_copy(relation);
        auto it = std::find_if(s.relation_types.begin(), s.relation_types.end(),
                               [&](const std::string& r) { return lower_copy(r) == lowered; });
        if (it == s.relation_types.end()) return std::nullopt;
        relation = *it;
    }
    const auto head_type = s.infer_type(parts[0]);
    const auto tail_type = s.infer_type(parts[2]);
    if (!head_type || !tail_type) return std::nullopt;
    return typed_triple{parts[0], *head_type, relation, parts[2], *tail_type};
}

}  // namespace

extraction_result extractor::extract(const std::string& answer, const schema& s) {
    extraction_result out = extract_pass(answer, s);
    extraction_result recovered = reflect_pass(answer, s, out.triples);
    out.rejected += recovered.rejected;
    for (auto& t : recovered.triples) out.triples.push_back(std::move(t));
    return out;
}

extraction_result rule_extractor::extract_pass(const std::string& answer, const schema& s) {
    extraction_result out;
    std::set<typed_triple> seen;
    for (const std::string& line : split_lines(answer)) {
        const auto shape = strict_shape(line);
        if (!shape) continue;
        const auto t = validate(*shape, s, /*relaxed=*/false);
        if (!t) {
            ++out.rejected;
            continue;
        }
        if (seen.insert(*t).second) out.triples.push_back(*t);
    }
    return out;
}

extraction_result rule_extractor::reflect_pass(const std::string& answer, const schema& s,
                                               const std::vector<typed_triple>& already) {
    extraction_result out;
    std::set<typed_triple> seen(already.begin(), already.end());
    for (const std::string& line : split_lines(answer)) {
        if (strict_shape(line)) continue;  // strict pass owns this line
        const auto shape = relaxed_shape(line);
        if (!shape) continue;
        const auto t = validate(*shape, s, /*relaxed=*/true);
        if (!t) {
            ++out.rejected;
            continue;
        }
        if (seen.insert(*t).second) out.triples.push_back(*t);
    }
    return out;
}

http_extractor::http_extractor(std::string host, int port, int timeout_ms, int retries)
    : host_(std::move(host)), port_(port), timeout_ms_(timeout_ms), retries_(retries) {}

extraction_result http_extractor::call(const char* pass, const std::string& answer,
                                       const schema& s,
                                       const std::vector<typed_triple>& already) {
    nlohmann::json body;
    body["task"] = pass;
    body["text"] = answer;
    body["schema"] = {{"entity_types", s.entity_types}, {"relation_types", s.relation_types}};
    auto& known = body["known"] = nlohmann::json::array();
    for (const typed_triple& t : already) {
        known.push_back({t.head, t.relation, t.tail});
    }
    const std::string payload = body.dump();

    for (int attempt = 0; attempt <= retries_; ++attempt) {
        httplib::Client client(host_, port_);
        client.set_connection_timeout(0, timeout_ms_ * 1000);
        client.set_read_timeout(0, timeout_ms_ * 1000);
        auto res = client.Post("/extract", payload, "application/json");
        if (!res || res->status != 200) continue;
        try {
            const nlohmann::json reply = nlohmann::json::parse(res->body);
            extraction_result out;
            out.rejected = reply.value("rejected", 0);
            std::set<typed_triple> seen(already.begin(), already.end());
            for (const auto& row : reply.value("triples", nlohmann::json::array())) {
                typed_triple t{row.at("head").get<std::string>(),
                               row.value("head_type", std::string{}),
                               row.at("relation").get<std::string>(),
                               row.at("tail").get<std::string>(),
                               row.value("tail_type", std::string{})};
                if (t.head_type.empty()) t.head_type = s.infer_type(t.head).value_or("");
                if (t.tail_type.empty()) t.tail_type = s.infer_type(t.tail).value_or("");
                // Never trust the wire blindly; the graph schema stays law.
                if (!s.has_relation(t.relation) || !s.has_entity_type(t.head_type) ||
                    !s.has_entity_type(t.tail_type)) {
                    ++out.rejected;
                    continue;
                }
                if (seen.insert(t).second) out.triples.push_back(std::move(t));
            }
            return out;
        } catch (const nlohmann::json::exception& e) {
            std::cerr << "http_extractor: bad reply from " << host_ << ":" << port_ << " ("
                      << e.what() << ")\n";
            break;
        }
    }
    std::cerr << "http_extractor: " << pass << " request to " << host_ << ":" << port_
              << " failed, returning no triples\n";
    return {};
}

extraction_result http_extractor::extract_pass(const std::string& answer, const schema& s) {
    return call("extract", answer, s, {});
}

extraction_result http_extractor::reflect_pass(const std::string& answer, const schema& s,
                                               const std::vector<typed_triple>& already) {
    return call("reflect", answer, s, already);
}

}  // namespace kgcrawl
