#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ringqc {

// Sectioned key-value configuration text.
//
// Grammar (line oriented):
//   [section]            opens a section; section names may repeat
//   key = value          entry in the current section
//   include = path       splices another file (path relative to this file)
//   # or ; to end of line is a comment; blank lines ignored
//
// Values keep interior whitespace; keys and values are trimmed at the ends.
struct ConfigSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
    std::string origin; // "file:line" of the section header, for diagnostics

    const std::string* find(std::string_view key) const;
    bool has(std::string_view key) const { return find(key) != nullptr; }

    // Typed getters. The non-defaulted forms throw ConfigError naming the
    // section and key when the entry is missing or malformed.
    std::string get_string(std::string_view key) const;
    double get_double(std::string_view key) const;
    long get_long(std::string_view key) const;
    bool get_bool(std::string_view key) const;

    std::string get_string_or(std::string_view key, std::string fallback) const;
    double get_double_or(std::string_view key, double fallback) const;
    long get_long_or(std::string_view key, long fallback) const;
    bool get_bool_or(std::string_view key, bool fallback) const;

    std::optional<double> maybe_double(std::string_view key) const;
    std::optional<long> maybe_long(std::string_view key) const;
};

struct ConfigFile {
    std::vector<ConfigSection> sections;

    static ConfigFile parse_file(const std::filesystem::path& path);
    static ConfigFile parse_string(std::string_view text,
                                   const std::string& origin_name = "<string>");

    /// First section with the given name, or nullptr.
    const ConfigSection* find(std::string_view name) const;
    /// Section that must exist.
    const ConfigSection& require(std::string_view name) const;
    /// All sections with the given name, in file order.
    std::vector<const ConfigSection*> all(std::string_view name) const;
};

} // namespace ringqc
