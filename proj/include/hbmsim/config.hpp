#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace hbmsim {

/// Minimal TOML-style config reader covering what experiment files need:
/// `[section]` tables, `key = value` pairs with integer, float, boolean,
/// quoted-string, and flat-array values, `#` comments. Nested tables,
/// dates, and multi-line strings are out of scope.
class ConfigFile {
public:
    using Scalar = std::variant<std::int64_t, double, bool, std::string>;

    static ConfigFile parse_string(const std::string& text);
    static ConfigFile parse_file(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;

    std::int64_t get_int(const std::string& section, const std::string& key,
                         std::int64_t fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;

    /// Array accessors return the stored list or `fallback` when absent.
    /// An explicitly empty array stays empty (callers decide how to react).
    std::vector<std::int64_t> get_int_list(const std::string& section, const std::string& key,
                                           std::vector<std::int64_t> fallback) const;
    std::vector<double> get_double_list(const std::string& section, const std::string& key,
                                        std::vector<double> fallback) const;
    std::vector<std::string> get_string_list(const std::string& section, const std::string& key,
                                             std::vector<std::string> fallback) const;

private:
    struct Entry {
        std::vector<Scalar> values;
        bool is_array = false;
    };

    const Entry* lookup(const std::string& section, const std::string& key) const;

    std::map<std::string, Entry> entries_; // keyed "section.key", "" section for top level
};

} // namespace hbmsim
