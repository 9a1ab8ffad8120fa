#pragma once

// Experiment config files.
//
//   # comment (to end of line)
//   key = value            top-level keys
//   [section]              following keys belong to `section`
//   [example.custom]       dotted section names are allowed
//   list = 1, 2, 3         lists are comma separated
//
// Keys and section names use [A-Za-z0-9_.-]. Values run to the end of the line
// (or a `#`) with surrounding blanks trimmed. A key may appear once per section.
// Integers accept plain digits or scientific notation with an integral value
// (1e6). Booleans are true/false/yes/no/1/0.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nnw {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

    [[nodiscard]] const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& ps) {
        std::string s = "invalid config:";
        for (const auto& p : ps) s += "\n  " + p;
        return s;
    }
    std::vector<std::string> problems_;
};

struct ConfigEntry {
    std::string value;
    int line = 0;  ///< 0 for values set programmatically
};

class Config {
public:
    using Section = std::map<std::string, ConfigEntry>;

    [[nodiscard]] static Config parse(std::istream& in, const std::string& source = "<config>") {
        Config cfg;
        cfg.source_ = source;
        std::vector<std::string> problems;
        std::string line;
        std::string section;
        cfg.sections_[section];
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            const std::string t = trim(line);
            if (t.empty()) continue;
            const std::string where = source + ":" + std::to_string(lineno) + ": ";
            if (t.front() == '[') {
                if (t.back() != ']') {
                    problems.push_back(where + "unterminated section header");
                    continue;
                }
                section = trim(t.substr(1, t.size() - 2));
                if (!valid_name(section)) problems.push_back(where + "bad section name '" + section + "'");
                cfg.sections_[section];
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos) {
                problems.push_back(where + "expected 'key = value'");
                continue;
            }
            const std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (!valid_name(key)) {
                problems.push_back(where + "bad key '" + key + "'");
                continue;
            }
            auto& sec = cfg.sections_[section];
            if (auto it = sec.find(key); it != sec.end()) {
                problems.push_back(where + "duplicate key '" + qualified(section, key) + "' (first on line " +
                                   std::to_string(it->second.line) + ")");
                continue;
            }
            sec.emplace(key, ConfigEntry{value, lineno});
        }
        if (!problems.empty()) throw ConfigError(std::move(problems));
        return cfg;
    }

    [[nodiscard]] static Config parse_string(const std::string& text, const std::string& source = "<string>") {
        std::istringstream in(text);
        return parse(in, source);
    }

    [[nodiscard]] static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
        return parse(in, path);
    }

    [[nodiscard]] const std::string& source() const noexcept { return source_; }
    [[nodiscard]] const std::map<std::string, Section>& sections() const noexcept { return sections_; }

    [[nodiscard]] const ConfigEntry* find(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        if (s == sections_.end()) return nullptr;
        const auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }

    void set(const std::string& section, const std::string& key, std::string value) {
        sections_[section][key] = ConfigEntry{std::move(value), 0};
    }

    [[nodiscard]] static std::string qualified(const std::string& section, const std::string& key) {
        return section.empty() ? key : section + "." + key;
    }

    [[nodiscard]] static std::string trim(std::string_view s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string_view::npos) return {};
        const auto e = s.find_last_not_of(" \t\r\n");
        return std::string(s.substr(b, e - b + 1));
    }

private:
    static bool valid_name(const std::string& s) {
        if (s.empty()) return false;
        for (char c : s)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) return false;
        return true;
    }

    std::string source_;
    std::map<std::string, Section> sections_;
};

/// Typed access that accumulates every problem instead of stopping at the
/// first. Call finish() once all keys are read; it rejects unknown keys and
/// throws a single ConfigError listing everything wrong.
class ConfigReader {
public:
    explicit ConfigReader(const Config& cfg) : cfg_(cfg) {}

    [[nodiscard]] bool has(const std::string& section, const std::string& key) const {
        return cfg_.find(section, key) != nullptr;
    }

    [[nodiscard]] bool has_section(const std::string& section) const {
        return cfg_.sections().count(section) != 0;
    }

    std::string text(const std::string& section, const std::string& key, std::optional<std::string> fallback = {}) {
        if (const auto* e = lookup(section, key)) return record(section, key, e->value);
        if (!fallback) {
            missing(section, key);
            return {};
        }
        return record(section, key, *fallback);
    }

    std::string choice(const std::string& section, const std::string& key, const std::vector<std::string>& allowed,
                       std::optional<std::string> fallback = {}) {
        if (!has(section, key) && !fallback) {
            missing(section, key);
            return {};
        }
        const std::string v = text(section, key, std::move(fallback));
        for (const auto& a : allowed)
            if (a == v) return v;
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(section, key, "'" + v + "' is not one of: " + list);
        return v;
    }

    double real(const std::string& section, const std::string& key, std::optional<double> fallback = {}) {
        const auto* e = lookup(section, key);
        if (!e) {
            if (!fallback) {
                missing(section, key);
                return 0.0;
            }
            record(section, key, format(*fallback));
            return *fallback;
        }
        const auto v = parse_real(e->value);
        if (!v) {
            record(section, key, e->value);
            fail(section, key, "'" + e->value + "' is not a finite number");
            return fallback.value_or(0.0);
        }
        record(section, key, e->value);
        return *v;
    }

    std::uint64_t integer(const std::string& section, const std::string& key,
                          std::optional<std::uint64_t> fallback = {}) {
        const auto* e = lookup(section, key);
        if (!e) {
            if (!fallback) {
                missing(section, key);
                return 0;
            }
            record(section, key, std::to_string(*fallback));
            return *fallback;
        }
        const auto v = parse_integer(e->value);
        if (!v) {
            record(section, key, e->value);
            fail(section, key, "'" + e->value + "' is not a non-negative integer");
            return fallback.value_or(0);
        }
        record(section, key, e->value);
        return *v;
    }

    bool boolean(const std::string& section, const std::string& key, std::optional<bool> fallback = {}) {
        const auto* e = lookup(section, key);
        if (!e) {
            if (!fallback) {
                missing(section, key);
                return false;
            }
            record(section, key, *fallback ? "true" : "false");
            return *fallback;
        }
        const std::string& s = e->value;
        record(section, key, s);
        if (s == "true" || s == "yes" || s == "1") return true;
        if (s == "false" || s == "no" || s == "0") return false;
        fail(section, key, "'" + s + "' is not a boolean");
        return fallback.value_or(false);
    }

    std::vector<std::string> list(const std::string& section, const std::string& key,
                                  std::optional<std::vector<std::string>> fallback = {}) {
        const auto* e = lookup(section, key);
        if (!e) {
            if (!fallback) {
                missing(section, key);
                return {};
            }
            record(section, key, join(*fallback));
            return *fallback;
        }
        record(section, key, e->value);
        std::vector<std::string> out;
        std::size_t start = 0;
        const std::string& s = e->value;
        while (true) {
            const auto comma = s.find(',', start);
            out.push_back(Config::trim(std::string_view(s).substr(start, comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        for (const auto& item : out)
            if (item.empty()) fail(section, key, "empty list item");
        return out;
    }

    std::vector<double> real_list(const std::string& section, const std::string& key,
                                  std::optional<std::vector<double>> fallback = {}) {
        std::optional<std::vector<std::string>> fb;
        if (fallback) {
            fb.emplace();
            for (double v : *fallback) fb->push_back(format(v));
        }
        std::vector<double> out;
        for (const auto& item : list(section, key, fb)) {
            const auto v = parse_real(item);
            if (!v)
                fail(section, key, "'" + item + "' is not a finite number");
            else
                out.push_back(*v);
        }
        return out;
    }

    std::vector<std::uint64_t> integer_list(const std::string& section, const std::string& key,
                                            std::optional<std::vector<std::uint64_t>> fallback = {}) {
        std::optional<std::vector<std::string>> fb;
        if (fallback) {
            fb.emplace();
            for (auto v : *fallback) fb->push_back(std::to_string(v));
        }
        std::vector<std::uint64_t> out;
        for (const auto& item : list(section, key, fb)) {
            const auto v = parse_integer(item);
            if (!v)
                fail(section, key, "'" + item + "' is not a non-negative integer");
            else
                out.push_back(*v);
        }
        return out;
    }

    /// Records a problem against a key (range checks done by callers).
    void fail(const std::string& section, const std::string& key, const std::string& what) {
        problems_.push_back(where(section, key) + what);
    }

    void fail(const std::string& what) { problems_.push_back(cfg_.source() + ": " + what); }

    /// Marks every key of a section as consumed (for sections read elsewhere).
    void consume_section(const std::string& section) {
        if (const auto it = cfg_.sections().find(section); it != cfg_.sections().end())
            for (const auto& [k, e] : it->second) record(section, k, e.value);
    }

    [[nodiscard]] bool ok() const noexcept { return problems_.empty(); }

    /// Throws ConfigError with every accumulated problem, plus one per unknown key.
    void finish() {
        for (const auto& [sec, keys] : cfg_.sections())
            for (const auto& [k, e] : keys)
                if (!resolved_.count(sec) || !resolved_.at(sec).count(k))
                    problems_.push_back(where(sec, k) + "unknown key");
        if (!problems_.empty()) throw ConfigError(problems_);
    }

    /// Every key read, defaults included, rendered back in config syntax.
    [[nodiscard]] std::string resolved_text() const {
        std::ostringstream os;
        for (const auto& [sec, keys] : resolved_) {
            if (!sec.empty()) os << '[' << sec << "]\n";
            for (const auto& [k, v] : keys) os << k << " = " << v << '\n';
        }
        return os.str();
    }

    [[nodiscard]] static std::optional<double> parse_real(const std::string& s) {
        double v = 0.0;
        const char* b = s.data();
        const char* e = s.data() + s.size();
        if (b != e && *b == '+') ++b;
        const auto r = std::from_chars(b, e, v);
        if (r.ec != std::errc() || r.ptr != e || !std::isfinite(v)) return std::nullopt;
        return v;
    }

    [[nodiscard]] static std::optional<std::uint64_t> parse_integer(const std::string& s) {
        std::uint64_t v = 0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec == std::errc() && r.ptr == s.data() + s.size()) return v;
        const auto d = parse_real(s);
        if (d && *d >= 0.0 && *d < 1.8e19 && std::floor(*d) == *d) return static_cast<std::uint64_t>(*d);
        return std::nullopt;
    }

private:
    const ConfigEntry* lookup(const std::string& section, const std::string& key) const {
        return cfg_.find(section, key);
    }

    std::string record(const std::string& section, const std::string& key, const std::string& value) {
        resolved_[section][key] = value;
        return value;
    }

    void missing(const std::string& section, const std::string& key) {
        problems_.push_back(cfg_.source() + ": missing required key '" + Config::qualified(section, key) + "'");
    }

    std::string where(const std::string& section, const std::string& key) const {
        const auto* e = cfg_.find(section, key);
        std::string loc = cfg_.source();
        if (e && e->line > 0) loc += ":" + std::to_string(e->line);
        return loc + ": '" + Config::qualified(section, key) + "': ";
    }

    static std::string format(double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    }

    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
        return s;
    }

    const Config& cfg_;
    std::vector<std::string> problems_;
    std::map<std::string, std::map<std::string, std::string>> resolved_;
};

}  // namespace nnw
