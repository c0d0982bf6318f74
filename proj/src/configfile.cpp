#include "ringqc/configfile.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "ringqc/errors.hpp"

namespace ringqc {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

std::string strip_comment(const std::string& line) {
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '#' || line[i] == ';')
            return line.substr(0, i);
    }
    return line;
}

void parse_into(ConfigFile& out, std::istream& is, const std::string& origin,
                const std::filesystem::path& base_dir,
                std::set<std::string>& include_stack) {
    std::string line;
    int lineno = 0;
    auto where = [&] { return origin + ":" + std::to_string(lineno); };

    while (std::getline(is, line)) {
        ++lineno;
        const std::string body = trim(strip_comment(line));
        if (body.empty())
            continue;

        if (body.front() == '[') {
            if (body.back() != ']')
                throw ConfigError(where() + ": unterminated section header '" +
                                  body + "'");
            const std::string name = trim(body.substr(1, body.size() - 2));
            if (name.empty())
                throw ConfigError(where() + ": empty section name");
            out.sections.push_back(ConfigSection{name, {}, where()});
            continue;
        }

        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where() + ": expected 'key = value', got '" +
                              body + "'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            throw ConfigError(where() + ": empty key");

        if (key == "include") {
            std::filesystem::path inc = value;
            if (inc.is_relative())
                inc = base_dir / inc;
            std::error_code ec;
            const auto canonical = std::filesystem::weakly_canonical(inc, ec);
            const std::string canon_str =
                ec ? inc.string() : canonical.string();
            if (include_stack.count(canon_str))
                throw ConfigError(where() + ": include cycle through '" +
                                  value + "'");
            std::ifstream f(inc);
            if (!f)
                throw ConfigError(where() + ": cannot open include '" +
                                  inc.string() + "'");
            include_stack.insert(canon_str);
            parse_into(out, f, inc.string(), inc.parent_path(), include_stack);
            include_stack.erase(canon_str);
            continue;
        }

        if (out.sections.empty())
            throw ConfigError(where() + ": entry '" + key +
                              "' appears before any [section]");
        out.sections.back().entries.emplace_back(key, value);
    }
}

} // namespace

const std::string* ConfigSection::find(std::string_view key) const {
    for (const auto& [k, v] : entries)
        if (k == key)
            return &v;
    return nullptr;
}

std::string ConfigSection::get_string(std::string_view key) const {
    const auto* v = find(key);
    if (!v)
        throw ConfigError("[" + name + "] (" + origin + "): missing key '" +
                          std::string(key) + "'");
    return *v;
}

double ConfigSection::get_double(std::string_view key) const {
    const std::string raw = get_string(key);
    try {
        std::size_t pos = 0;
        const double d = std::stod(raw, &pos);
        while (pos < raw.size() &&
               std::isspace(static_cast<unsigned char>(raw[pos])))
            ++pos;
        if (pos != raw.size())
            throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("[" + name + "]: key '" + std::string(key) +
                          "' is not a number: '" + raw + "'");
    }
}

long ConfigSection::get_long(std::string_view key) const {
    const std::string raw = get_string(key);
    // accept scientific notation for counts like 1e5
    const double d = get_double(key);
    const long l = static_cast<long>(d);
    if (static_cast<double>(l) != d)
        throw ConfigError("[" + name + "]: key '" + std::string(key) +
                          "' is not an integer: '" + raw + "'");
    return l;
}

bool ConfigSection::get_bool(std::string_view key) const {
    const std::string raw = get_string(key);
    if (raw == "true" || raw == "1" || raw == "yes" || raw == "on")
        return true;
    if (raw == "false" || raw == "0" || raw == "no" || raw == "off")
        return false;
    throw ConfigError("[" + name + "]: key '" + std::string(key) +
                      "' is not a boolean: '" + raw + "'");
}

std::string ConfigSection::get_string_or(std::string_view key,
                                         std::string fallback) const {
    const auto* v = find(key);
    return v ? *v : std::move(fallback);
}

double ConfigSection::get_double_or(std::string_view key,
                                    double fallback) const {
    return find(key) ? get_double(key) : fallback;
}

long ConfigSection::get_long_or(std::string_view key, long fallback) const {
    return find(key) ? get_long(key) : fallback;
}

bool ConfigSection::get_bool_or(std::string_view key, bool fallback) const {
    return find(key) ? get_bool(key) : fallback;
}

std::optional<double> ConfigSection::maybe_double(std::string_view key) const {
    if (!find(key))
        return std::nullopt;
    return get_double(key);
}

std::optional<long> ConfigSection::maybe_long(std::string_view key) const {
    if (!find(key))
        return std::nullopt;
    return get_long(key);
}

ConfigFile ConfigFile::parse_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open config file '" + path.string() + "'");
    ConfigFile out;
    std::set<std::string> stack;
    std::error_code ec;
    const auto canonical = std::filesystem::weakly_canonical(path, ec);
    stack.insert(ec ? path.string() : canonical.string());
    parse_into(out, f, path.string(), path.parent_path(), stack);
    return out;
}

ConfigFile ConfigFile::parse_string(std::string_view text,
                                    const std::string& origin_name) {
    std::istringstream is{std::string(text)};
    ConfigFile out;
    std::set<std::string> stack;
    parse_into(out, is, origin_name, std::filesystem::current_path(), stack);
    return out;
}

const ConfigSection* ConfigFile::find(std::string_view name) const {
    for (const auto& s : sections)
        if (s.name == name)
            return &s;
    return nullptr;
}

const ConfigSection& ConfigFile::require(std::string_view name) const {
    const auto* s = find(name);
    if (!s)
        throw ConfigError("missing required section [" + std::string(name) +
                          "]");
    return *s;
}

std::vector<const ConfigSection*> ConfigFile::all(std::string_view name) const {
    std::vector<const ConfigSection*> out;
    for (const auto& s : sections)
        if (s.name == name)
            out.push_back(&s);
    return out;
}

} // namespace ringqc
