#include "hbmsim/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "hbmsim/errors.hpp"

namespace hbmsim {

namespace {

std::string strip(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

/// Cuts a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

ConfigFile::Scalar parse_scalar(const std::string& raw, int line_no) {
    const std::string token = strip(raw);
    if (token.empty()) {
        throw ConfigError("config line " + std::to_string(line_no) + ": empty value");
    }
    if (token.front() == '"') {
        if (token.size() < 2 || token.back() != '"') {
            throw ConfigError("config line " + std::to_string(line_no) + ": unterminated string");
        }
        return token.substr(1, token.size() - 2);
    }
    if (token == "true") return true;
    if (token == "false") return false;
    // Integer first; fall through to float on '.', 'e', or overflow.
    try {
        std::size_t used = 0;
        if (token.find_first_of(".eE") == std::string::npos) {
            const std::int64_t v = std::stoll(token, &used);
            if (used == token.size()) return v;
        }
    } catch (const std::exception&) {
        // not an integer
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used == token.size()) return v;
    } catch (const std::exception&) {
        // not a float either
    }
    throw ConfigError("config line " + std::to_string(line_no) + ": cannot parse value '" +
                      token + "'");
}

std::vector<ConfigFile::Scalar> parse_array(const std::string& raw, int line_no) {
    const std::string inner = strip(raw.substr(1, raw.size() - 2));
    std::vector<ConfigFile::Scalar> values;
    if (inner.empty()) return values;
    std::size_t begin = 0;
    bool quoted = false;
    for (std::size_t i = 0; i <= inner.size(); ++i) {
        if (i < inner.size() && inner[i] == '"') quoted = !quoted;
        if (i == inner.size() || (inner[i] == ',' && !quoted)) {
            values.push_back(parse_scalar(inner.substr(begin, i - begin), line_no));
            begin = i + 1;
        }
    }
    return values;
}

} // namespace

ConfigFile ConfigFile::parse_string(const std::string& text) {
    ConfigFile config;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        line = strip(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": malformed section header");
            }
            section = strip(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        Entry entry;
        if (!value.empty() && value.front() == '[') {
            if (value.back() != ']') {
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unterminated array");
            }
            entry.is_array = true;
            entry.values = parse_array(value, line_no);
        } else {
            entry.values.push_back(parse_scalar(value, line_no));
        }
        config.entries_[section + "." + key] = std::move(entry);
    }
    return config;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path);
    std::stringstream buffer;
    buffer << is.rdbuf();
    return parse_string(buffer.str());
}

const ConfigFile::Entry* ConfigFile::lookup(const std::string& section,
                                            const std::string& key) const {
    const auto it = entries_.find(section + "." + key);
    return it == entries_.end() ? nullptr : &it->second;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    return lookup(section, key) != nullptr;
}

namespace {

std::int64_t scalar_int(const ConfigFile::Scalar& s, const std::string& what) {
    if (const auto* v = std::get_if<std::int64_t>(&s)) return *v;
    throw ConfigError(what + " is not an integer");
}

double scalar_double(const ConfigFile::Scalar& s, const std::string& what) {
    if (const auto* v = std::get_if<double>(&s)) return *v;
    if (const auto* v = std::get_if<std::int64_t>(&s)) return static_cast<double>(*v);
    throw ConfigError(what + " is not a number");
}

std::string scalar_string(const ConfigFile::Scalar& s, const std::string& what) {
    if (const auto* v = std::get_if<std::string>(&s)) return *v;
    throw ConfigError(what + " is not a string");
}

} // namespace

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key,
                                 std::int64_t fallback) const {
    const Entry* entry = lookup(section, key);
    if (entry == nullptr) return fallback;
    if (entry->is_array || entry->values.size() != 1) {
        throw ConfigError(section + "." + key + " is not a scalar");
    }
    return scalar_int(entry->values[0], section + "." + key);
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    const Entry* entry = lookup(section, key);
    if (entry == nullptr) return fallback;
    if (entry->is_array || entry->values.size() != 1) {
        throw ConfigError(section + "." + key + " is not a scalar");
    }
    return scalar_double(entry->values[0], section + "." + key);
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    const Entry* entry = lookup(section, key);
    if (entry == nullptr) return fallback;
    if (entry->is_array || entry->values.size() != 1) {
        throw ConfigError(section + "." + key + " is not a scalar");
    }
    if (const auto* v = std::get_if<bool>(&entry->values[0])) return *v;
    throw ConfigError(section + "." + key + " is not a boolean");
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    const Entry* entry = lookup(section, key);
    if (entry == nullptr) return fallback;
    if (entry->is_array || entry->values.size() != 1) {
        throw ConfigError(section + "." + key + " is not a scalar");
    }
    return scalar_string(entry->values[0], section + "." + key);
}

std::vector<std::int64_t> ConfigFile::get_int_list(const std::string& section,
                                                   const std::string& key,
                                                   std::vector<std::int64_t> fallback) const {
    const Entry* entry = lookup(section, key);
    if (entry == nullptr) return fallback;
    if (!entry->is_array) throw ConfigError(section + "." + key + " is not an array");
    std::vector<std::int64_t> out;
    for (const auto& s : entry->values) out.push_back(scalar_int(s, section + "." + key));
    return out;
}

std::vector<double> ConfigFile::get_double_list(const std::string& section,
                                                const std::string& key,
                                                std::vector<double> fallback) const {
    const Entry* entry = lookup(section, key);
    if (entry == nullptr) return fallback;
    if (!entry->is_array) throw ConfigError(section + "." + key + " is not an array");
    std::vector<double> out;
    for (const auto& s : entry->values) out.push_back(scalar_double(s, section + "." + key));
    return out;
}

std::vector<std::string> ConfigFile::get_string_list(const std::string& section,
                                                     const std::string& key,
                                                     std::vector<std::string> fallback) const {
    const Entry* entry = lookup(section, key);
    if (entry == nullptr) return fallback;
    if (!entry->is_array) throw ConfigError(section + "." + key + " is not an array");
    std::vector<std::string> out;
    for (const auto& s : entry->values) out.push_back(scalar_string(s, section + "." + key));
    return out;
}

} // namespace hbmsim
