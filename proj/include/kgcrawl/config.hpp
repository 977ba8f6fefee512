#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

// Flat config store parsed from a small TOML subset: [sections],
// `key = value` scalars (strings, ints, floats, bools) and single-line
// arrays, with # comments. Keys are exposed dot-joined
// ("victim.p_leak"). Enough for run configuration without pulling in a
// full TOML implementation; anything outside the subset is a hard parse
// error rather than a silent guess.

namespace kgcrawl {

class config_map {
public:
    config_map() = default;

    static config_map from_file(const std::string& path);
    static config_map from_string(const std::string& text);

    // "section.key=value" with the value in the same syntax a file would
    // use. Applied on top of whatever was parsed.
    void set_override(const std::string& assignment);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key,
                                      std::vector<std::string> fallback) const;
    std::vector<std::int64_t> get_int_list(const std::string& key,
                                           std::vector<std::int64_t> fallback) const;

    const std::map<std::string, std::string>& scalars() const { return scalars_; }

private:
    void parse(const std::string& text, const std::string& origin);
    void assign(const std::string& key, const std::string& raw_value, const std::string& where);

    std::map<std::string, std::string> scalars_;
    std::map<std::string, std::vector<std::string>> lists_;
};

}  // namespace kgcrawl
