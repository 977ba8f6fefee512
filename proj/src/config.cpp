#include "kgcrawl/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "kgcrawl/errors.hpp"

namespace kgcrawl {

namespace {

std::string trim(const std::string& s) {
    std::size_t lo = 0;
    std::size_t hi = s.size();
    while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
    while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
    return s.substr(lo, hi - lo);
}

// Cut an unquoted # comment; respects double quotes.
std::string strip_comment(const std::string& line) {
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_quotes = !in_quotes;
        if (line[i] == '#' && !in_quotes) return line.substr(0, i);
    }
    return line;
}

std::string unquote(const std::string& raw, const std::string& where) {
    if (raw.size() < 2 || raw.back() != '"') {
        throw config_error(where + ": unterminated string " + raw);
    }
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
        if (raw[i] == '\\' && i + 2 < raw.size()) {
            ++i;
            switch (raw[i]) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default:
                    throw config_error(where + ": unsupported escape \\" +
                                       std::string(1, raw[i]));
            }
        } else {
            out.push_back(raw[i]);
        }
    }
    return out;
}

std::vector<std::string> split_array_items(const std::string& body, const std::string& where) {
    std::vector<std::string> items;
    std::string cur;
    bool in_quotes = false;
    for (char c : body) {
        if (c == '"') in_quotes = !in_quotes;
        if (c == ',' && !in_quotes) {
            items.push_back(trim(cur));
            cur.clear();
            continue;
        }
        cur.push_back(c);
    }
    const std::string last = trim(cur);
    if (!last.empty()) items.push_back(last);
    if (in_quotes) throw config_error(where + ": unterminated string in array");
    for (std::string& item : items) {
        if (item.empty()) throw config_error(where + ": empty array element");
        if (item.front() == '"') item = unquote(item, where);
    }
    return items;
}

bool valid_key(const std::string& key) {
    if (key.empty()) return false;
    for (char c : key) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') return false;
    }
    return true;
}

}  // namespace

config_map config_map::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    config_map cfg;
    cfg.parse(buf.str(), path);
    return cfg;
}

config_map config_map::from_string(const std::string& text) {
    config_map cfg;
    cfg.parse(text, "<inline>");
    return cfg;
}

void config_map::assign(const std::string& key, const std::string& raw_value,
                        const std::string& where) {
    if (!valid_key(key)) throw config_error(where + ": bad key '" + key + "'");
    if (raw_value.empty()) throw config_error(where + ": empty value for " + key);

    if (raw_value.front() == '[') {
        if (raw_value.back() != ']') {
            throw config_error(where + ": arrays must close on the same line (" + key + ")");
        }
        lists_[key] = split_array_items(raw_value.substr(1, raw_value.size() - 2), where);
        scalars_.erase(key);
        return;
    }
    std::string value = raw_value;
    if (value.front() == '"') value = unquote(value, where);
    scalars_[key] = value;
    lists_.erase(key);
}

void config_map::parse(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        line = trim(strip_comment(line));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw config_error(where + ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_key(section)) {
                throw config_error(where + ": bad section name '" + section + "'");
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw config_error(where + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        assign(section.empty() ? key : section + "." + key, value, where);
    }
}

void config_map::set_override(const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw config_error("override '" + assignment + "': expected key=value");
    }
    assign(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)),
           "<override " + assignment + ">");
}

bool config_map::has(const std::string& key) const {
    return scalars_.count(key) > 0 || lists_.count(key) > 0;
}

std::string config_map::get_string(const std::string& key, const std::string& fallback) const {
    auto it = scalars_.find(key);
    return it == scalars_.end() ? fallback : it->second;
}

std::int64_t config_map::get_int(const std::string& key, std::int64_t fallback) const {
    auto it = scalars_.find(key);
    if (it == scalars_.end()) return fallback;
    try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw config_error("config: " + key + " expects an integer, got '" + it->second + "'");
    }
}

double config_map::get_double(const std::string& key, double fallback) const {
    auto it = scalars_.find(key);
    if (it == scalars_.end()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw config_error("config: " + key + " expects a number, got '" + it->second + "'");
    }
}

bool config_map::get_bool(const std::string& key, bool fallback) const {
    auto it = scalars_.find(key);
    if (it == scalars_.end()) return fallback;
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    throw config_error("config: " + key + " expects true/false, got '" + it->second + "'");
}

std::vector<std::string> config_map::get_list(const std::string& key,
                                              std::vector<std::string> fallback) const {
    auto it = lists_.find(key);
    return it == lists_.end() ? fallback : it->second;
}

std::vector<std::int64_t> config_map::get_int_list(const std::string& key,
                                                   std::vector<std::int64_t> fallback) const {
    auto it = lists_.find(key);
    if (it == lists_.end()) return fallback;
    std::vector<std::int64_t> out;
    out.reserve(it->second.size());
    for (const std::string& item : it->second) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoll(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw config_error("config: " + key + " expects integers, got '" + item + "'");
        }
    }
    return out;
}

}  // namespace kgcrawl
