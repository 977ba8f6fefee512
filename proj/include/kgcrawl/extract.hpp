#pragma once

#include <string>
#include <vector>

#include "kgcrawl/kg.hpp"

// Triple extraction from victim answers.
//
// Extraction runs in two passes. The strict pass only accepts lines that
// exactly follow the "head | relation | tail" rendering. The reflect
// pass re-reads the lines the strict grammar did not match and applies a
// relaxed grammar (loose spacing around pipes, relation case variants)
// to recover near-miss facts; it never re-reports what the strict pass
// already found. `rejected` counts candidates that parsed as a triple
// shape but failed schema validation (unknown relation, un-inferable
// entity type).

namespace kgcrawl {

struct extraction_result {
    std::vector<typed_triple> triples;
    int rejected = 0;
};

class extractor {
public:
    virtual ~extractor() = default;

    virtual extraction_result extract_pass(const std::string& answer, const schema& s) = 0;
    virtual extraction_result reflect_pass(const std::string& answer, const schema& s,
                                           const std::vector<typed_triple>& already) = 0;

    // Strict pass followed by the reflect pass; union of both.
    extraction_result extract(const std::string& answer, const schema& s);
};

class rule_extractor final : public extractor {
public:
    extraction_result extract_pass(const std::string& answer, const schema& s) override;
    extraction_result reflect_pass(const std::string& answer, const schema& s,
                                   const std::vector<typed_triple>& already) override;
};

// Delegates both passes to an external service speaking a small JSON
// protocol (POST /extract). Responses are schema-checked locally; any
// transport failure degrades to an empty result with a warning on
// stderr, so a flaky service can never corrupt the graph.
class http_extractor final : public extractor {
public:
    http_extractor(std::string host, int port, int timeout_ms = 2000, int retries = 1);

    extraction_result extract_pass(const std::string& answer, const schema& s) override;
    extraction_result reflect_pass(const std::string& answer, const schema& s,
                                   const std::vector<typed_triple>& already) override;

private:
    extraction_result call(const char* pass, const std::string& answer, const schema& s,
                           const std::vector<typed_triple>& already);

    std::string host_;
    int port_;
    int timeout_ms_;
    int retries_;
};

}  // namespace kgcrawl
