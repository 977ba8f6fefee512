#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Deterministic text embeddings.
//
// embedder maps text to a fixed-dimension unit vector by hashing token
// n-grams (and optionally character n-grams inside each token) into
// signed buckets. Two embedders with the same spec produce bit-identical
// vectors for the same input on any platform, which is what the rest of
// the pipeline leans on for reproducible retrieval and deduplication.

namespace kgcrawl {

struct embedding_vector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
};

double l2_norm(const embedding_vector& v);
double cosine(const embedding_vector& a, const embedding_vector& b);

// Lowercased whitespace-split tokens with punctuation trimmed from both
// ends. Interior punctuation survives, so "disease_2?" -> "disease_2".
std::vector<std::string> tokenize(std::string_view text);

enum class embedding_source {
    feature_hash,  // embed_text hashes the input itself
    file_loaded,   // vectors come from a jsonl file, embed_text is unavailable
};

struct embedder_spec {
    std::size_t dim = 256;
    std::uint64_t seed = 0;
    int ngram_min = 1;  // token n-gram orders, inclusive
    int ngram_max = 2;
    // Character n-gram orders inside each token, 0/0 disables them. Used
    // where suffix variants of single-token names must land close in
    // cosine space (entity alias resolution); left off for retrieval.
    int char_ngram_min = 0;
    int char_ngram_max = 0;
    embedding_source source = embedding_source::feature_hash;
};

class embedder {
public:
    explicit embedder(embedder_spec spec);

    // Throws empty_text_error when no token survives trimming.
    embedding_vector embed(std::string_view text) const;

    const embedder_spec& spec() const { return spec_; }

private:
    embedder_spec spec_;
};

// Exact top-k cosine retrieval over named vectors. Entries are kept in a
// sorted map and ties broken by ascending id so results are reproducible.
class vector_index {
public:
    explicit vector_index(std::size_t dim);

    // Throws dimension_mismatch_error when vec.dim() != dim().
    void add(const std::string& id, embedding_vector vec);

    // Scores every entry, orders by (cosine desc, id asc) and returns the
    // first min(k, size()) pairs. Throws zero_vector_error for an all-zero
    // query.
    std::vector<std::pair<std::string, double>> top_k(const embedding_vector& query,
                                                      std::size_t k) const;

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return entries_.size(); }
    bool contains(const std::string& id) const { return entries_.count(id) > 0; }
    const std::map<std::string, embedding_vector>& entries() const { return entries_; }

private:
    std::size_t dim_;
    std::map<std::string, embedding_vector> entries_;
};

// Loads {"id": ..., "vec": [...]} lines. Every vector must match `dim`.
vector_index load_vectors_jsonl(const std::string& path, std::size_t dim);

}  // namespace kgcrawl
