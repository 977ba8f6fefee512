#include "kgcrawl/embed.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "kgcrawl/errors.hpp"
#include "kgcrawl/rng.hpp"

namespace kgcrawl {

namespace {

// Separator byte for joining tokens into an n-gram key; never appears in
// a token because it is whitespace-free control ASCII.
constexpr char kGramSep = '\x1f';
// Marker distinguishing character-level grams from token-level ones.
constexpr char kCharMark = '\x02';

bool is_space_byte(unsigned char c) { return std::isspace(c) != 0; }
bool is_punct_byte(unsigned char c) { return std::ispunct(c) != 0; }

}  // namespace

double l2_norm(const embedding_vector& v) {
    double acc = 0.0;
    for (double x : v.values) acc += x * x;
    return std::sqrt(acc);
}

double cosine(const embedding_vector& a, const embedding_vector& b) {
    if (a.dim() != b.dim()) {
        throw dimension_mismatch_error("cosine: dimension mismatch " + std::to_string(a.dim()) +
                                       " vs " + std::to_string(b.dim()));
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) {
        throw zero_vector_error("cosine: zero-norm operand");
    }
    return dot / (na * nb);
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space_byte(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_space_byte(static_cast<unsigned char>(text[i]))) ++i;
        if (i == start) continue;
        std::size_t lo = start;
        std::size_t hi = i;
        while (lo < hi && is_punct_byte(static_cast<unsigned char>(text[lo]))) ++lo;
        while (hi > lo && is_punct_byte(static_cast<unsigned char>(text[hi - 1]))) --hi;
        if (hi == lo) continue;
        std::string tok(text.substr(lo, hi - lo));
        for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        tokens.push_back(std::move(tok));
    }
    return tokens;
}

embedder::embedder(embedder_spec spec) : spec_(std::move(spec)) {
    if (spec_.dim == 0) throw dimension_mismatch_error("embedder: dim must be positive");
    // 0/0 disables a gram family; otherwise the range must be sane.
    const bool token_grams = !(spec_.ngram_min == 0 && spec_.ngram_max == 0);
    const bool char_grams = !(spec_.char_ngram_min == 0 && spec_.char_ngram_max == 0);
    if (token_grams && (spec_.ngram_min < 1 || spec_.ngram_max < spec_.ngram_min)) {
        throw config_error("embedder: bad token n-gram range");
    }
    if (char_grams && (spec_.char_ngram_min < 1 || spec_.char_ngram_max < spec_.char_ngram_min)) {
        throw config_error("embedder: bad char n-gram range");
    }
    if (!token_grams && !char_grams) {
        throw config_error("embedder: all gram families disabled");
    }
}

embedding_vector embedder::embed(std::string_view text) const {
    if (spec_.source != embedding_source::feature_hash) {
        throw std::logic_error("embedder: embed() requires a feature_hash source");
    }
    const std::vector<std::string> tokens = tokenize(text);
    if (tokens.empty()) {
        throw empty_text_error("embedder: no tokens in input");
    }

    embedding_vector out;
    out.values.assign(spec_.dim, 0.0);

    auto bump = [&](std::string_view gram) {
        const std::uint64_t h = hash64(gram, spec_.seed);
        const std::size_t bucket = static_cast<std::size_t>(h % spec_.dim);
        out.values[bucket] += (h >> 63) ? -1.0 : 1.0;
    };

    std::string gram;
    for (int n = std::max(spec_.ngram_min, 1); n <= spec_.ngram_max; ++n) {
        if (tokens.size() < static_cast<std::size_t>(n)) break;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            gram.clear();
            for (int j = 0; j < n; ++j) {
                if (j > 0) gram.push_back(kGramSep);
                gram += tokens[i + j];
            }
            bump(gram);
        }
    }

    if (spec_.char_ngram_max > 0) {
        for (const std::string& tok : tokens) {
            for (int n = spec_.char_ngram_min; n <= spec_.char_ngram_max; ++n) {
                if (tok.size() < static_cast<std::size_t>(n)) break;
                for (std::size_t i = 0; i + n <= tok.size(); ++i) {
                    gram.assign(1, kCharMark);
                    gram.append(tok, i, static_cast<std::size_t>(n));
                    bump(gram);
                }
            }
        }
    }

    const double norm = l2_norm(out);
    if (norm == 0.0) {
        // Only reachable when every gram cancels inside the same bucket.
        throw zero_vector_error("embedder: features cancelled to a zero vector");
    }
    for (double& x : out.values) x /= norm;
    return out;
}

vector_index::vector_index(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw dimension_mismatch_error("vector_index: dim must be positive");
}

void vector_index::add(const std::string& id, embedding_vector vec) {
    if (vec.dim() != dim_) {
        throw dimension_mismatch_error("vector_index: vector for '" + id + "' has dim " +
                                       std::to_string(vec.dim()) + ", expected " +
                                       std::to_string(dim_));
    }
    if (l2_norm(vec) == 0.0) {
        throw zero_vector_error("vector_index: zero vector for '" + id + "'");
    }
    entries_[id] = std::move(vec);
}

std::vector<std::pair<std::string, double>> vector_index::top_k(const embedding_vector& query,
                                                                std::size_t k) const {
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(entries_.size());
    for (const auto& [id, vec] : entries_) {
        scored.emplace_back(id, cosine(query, vec));
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

vector_index load_vectors_jsonl(const std::string& path, std::size_t dim) {
    std::ifstream in(path);
    if (!in) throw io_error("load_vectors_jsonl: cannot open " + path);
    vector_index index(dim);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw io_error("load_vectors_jsonl: " + path + ":" + std::to_string(lineno) + ": " +
                           e.what());
        }
        if (!row.contains("id") || !row.contains("vec")) {
            throw io_error("load_vectors_jsonl: " + path + ":" + std::to_string(lineno) +
                           ": missing id/vec");
        }
        embedding_vector vec;
        vec.values = row.at("vec").get<std::vector<double>>();
        if (vec.dim() != dim) {
            throw dimension_mismatch_error("load_vectors_jsonl: " + path + ":" +
                                           std::to_string(lineno) + ": dim " +
                                           std::to_string(vec.dim()) + ", expected " +
                                           std::to_string(dim));
        }
        const std::string id = row.at("id").get<std::string>();
        if (index.contains(id)) {
            throw io_error("load_vectors_jsonl: duplicate id '" + id + "'");
        }
        index.add(id, std::move(vec));
    }
    return index;
}

}  // namespace kgcrawl
