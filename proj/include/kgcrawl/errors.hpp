#pragma once

#include <stdexcept>
#include <string>

// Error types shared across the library. Everything derives from the
// standard exceptions so callers that don't care about the fine-grained
// type can still catch std::runtime_error / std::invalid_argument.

namespace kgcrawl {

struct empty_text_error : std::invalid_argument {
    explicit empty_text_error(const std::string& what) : std::invalid_argument(what) {}
};

struct dimension_mismatch_error : std::invalid_argument {
    explicit dimension_mismatch_error(const std::string& what) : std::invalid_argument(what) {}
};

struct zero_vector_error : std::invalid_argument {
    explicit zero_vector_error(const std::string& what) : std::invalid_argument(what) {}
};

struct empty_query_error : std::invalid_argument {
    explicit empty_query_error(const std::string& what) : std::invalid_argument(what) {}
};

struct unknown_entity_error : std::out_of_range {
    explicit unknown_entity_error(const std::string& what) : std::out_of_range(what) {}
};

struct empty_candidates_error : std::runtime_error {
    explicit empty_candidates_error(const std::string& what) : std::runtime_error(what) {}
};

struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct io_error : std::runtime_error {
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kgcrawl
