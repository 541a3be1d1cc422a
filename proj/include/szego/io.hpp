#pragma once

// Persistence: key = value configuration files with sections and environment
// overrides, CSV/JSON writers, series readers and the per-run manifest.

#include "szego/processes.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>
#include <gmp.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace szego::io {

using json = nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kEnvPrefix = "SZEGO_";

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Shortest text that reads back to the same double.
inline std::string fmt_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

/// JSON number, with non-finite values mapped to null.
inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// ---------------------------------------------------------------------------
// configuration

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& where, int line, const std::string& field, const std::string& what)
        : std::runtime_error(compose(where, line, field, what)), line_(line), field_(field) {}
    int line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    static std::string compose(const std::string& where, int line, const std::string& field, const std::string& what) {
        std::string s = where;
        if (line > 0) s += ":" + std::to_string(line);
        if (!field.empty()) s += ": field '" + field + "'";
        return s + ": " + what;
    }
    int line_ = 0;
    std::string field_;
};

struct ConfigEntry {
    std::string value;
    int line = 0;
    std::string source;  ///< file name, "env" or "cli"
};

/// Flat key store: "section.sub.key" -> entry. Sections may nest with dots,
/// e.g. [fit.weight].
class Config {
public:
    static Config parse(std::istream& in, const std::string& name = "<config>") {
        Config c;
        c.name_ = name;
        std::string raw, section;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            std::string s = strip_comment(raw);
            s = trim(s);
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']') throw ConfigError(name, line, "", "unterminated section header");
                section = lower(trim(s.substr(1, s.size() - 2)));
                if (section.empty() || !valid_key(section)) throw ConfigError(name, line, "", "bad section name '" + section + "'");
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError(name, line, "", "expected 'key = value'");
            const std::string key = lower(trim(s.substr(0, eq)));
            if (key.empty() || !valid_key(key)) throw ConfigError(name, line, key, "bad key name");
            std::string value = trim(s.substr(eq + 1));
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
            const std::string full = section.empty() ? key : section + "." + key;
            if (c.entries_.count(full)) throw ConfigError(name, line, full, "duplicate key (first set on line " + std::to_string(c.entries_[full].line) + ")");
            c.entries_[full] = {value, line, name};
        }
        return c;
    }

    static Config load(const std::filesystem::path& p) {
        std::ifstream in(p);
        if (!in) throw ConfigError(p.string(), 0, "", "cannot open configuration file");
        return parse(in, p.string());
    }

    /// SZEGO_CLT__REPLICAS=100 sets clt.replicas; "__" separates levels.
    void apply_env(char** envp, const std::string& prefix = kEnvPrefix) {
        if (!envp) return;
        for (char** e = envp; *e; ++e) {
            const std::string kv(*e);
            if (kv.rfind(prefix, 0) != 0) continue;
            const auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            std::string key = lower(kv.substr(prefix.size(), eq - prefix.size()));
            for (std::size_t p; (p = key.find("__")) != std::string::npos;) key.replace(p, 2, ".");
            if (key.empty() || !valid_key(key)) continue;
            entries_[key] = {kv.substr(eq + 1), 0, "env"};
        }
    }

    void set(const std::string& key, const std::string& value, const std::string& source = "cli") { entries_[lower(key)] = {value, 0, source}; }
    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    const std::map<std::string, ConfigEntry>& entries() const { return entries_; }
    const std::string& name() const { return name_; }

    std::string get_string(const std::string& key, const std::optional<std::string>& dflt = std::nullopt) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            if (dflt) return *dflt;
            throw ConfigError(name_, 0, key, "required field missing");
        }
        return it->second.value;
    }

    double get_double(const std::string& key, std::optional<double> dflt = std::nullopt) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            if (dflt) return *dflt;
            throw ConfigError(name_, 0, key, "required field missing");
        }
        return to_double(it->second, key);
    }

    long long get_int(const std::string& key, std::optional<long long> dflt = std::nullopt) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            if (dflt) return *dflt;
            throw ConfigError(name_, 0, key, "required field missing");
        }
        const auto& v = it->second.value;
        std::size_t pos = 0;
        long long out = 0;
        try {
            out = std::stoll(v, &pos, 0);
        } catch (...) {
            pos = 0;
        }
        if (pos != v.size() || v.empty()) throw error(it->second, key, "expected an integer, got '" + v + "'");
        return out;
    }

    bool get_bool(const std::string& key, std::optional<bool> dflt = std::nullopt) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            if (dflt) return *dflt;
            throw ConfigError(name_, 0, key, "required field missing");
        }
        const std::string v = lower(it->second.value);
        if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
        if (v == "false" || v == "no" || v == "0" || v == "off") return false;
        throw error(it->second, key, "expected a boolean, got '" + it->second.value + "'");
    }

    /// Comma separated numbers; entries may be written as 2^k.
    std::vector<double> get_list(const std::string& key, const std::optional<std::vector<double>>& dflt = std::nullopt) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            if (dflt) return *dflt;
            throw ConfigError(name_, 0, key, "required field missing");
        }
        std::vector<double> out;
        std::stringstream ss(it->second.value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            out.push_back(to_double({item, it->second.line, it->second.source}, key));
        }
        if (out.empty()) throw error(it->second, key, "expected a non-empty list");
        return out;
    }

    /// Rejects keys outside `allowed` (exact keys or "prefix.*" wildcards).
    void check_known(const std::set<std::string>& allowed) const {
        for (const auto& [k, e] : entries_) {
            bool ok = allowed.count(k) > 0;
            for (const auto& a : allowed)
                if (!ok && a.size() > 2 && a.compare(a.size() - 2, 2, ".*") == 0 && k.rfind(a.substr(0, a.size() - 1), 0) == 0) ok = true;
            if (!ok) throw error(e, k, "unknown field");
        }
    }

    ConfigError error(const std::string& key, const std::string& what) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return ConfigError(name_, 0, key, what);
        return error(it->second, key, what);
    }

    /// Sorted key=value lines; the basis of the configuration hash.
    std::string canonical() const {
        std::string s;
        for (const auto& [k, e] : entries_) s += k + "=" + e.value + "\n";
        return s;
    }
    std::uint64_t hash() const { return fnv1a(canonical()); }

private:
    ConfigError error(const ConfigEntry& e, const std::string& key, const std::string& what) const {
        return ConfigError(e.source.empty() ? name_ : e.source, e.line, key, what);
    }

    double to_double(const ConfigEntry& e, const std::string& key) const {
        const std::string v = trim(e.value);
        const auto caret = v.find('^');
        try {
            std::size_t pos = 0;
            if (caret != std::string::npos) {
                const double b = std::stod(v.substr(0, caret), &pos);
                if (pos != caret) throw std::invalid_argument("");
                const std::string es = v.substr(caret + 1);
                const double ex = std::stod(es, &pos);
                if (pos != es.size()) throw std::invalid_argument("");
                return std::pow(b, ex);
            }
            const double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return x;
        } catch (...) {
            throw error(e, key, "expected a number, got '" + e.value + "'");
        }
    }

    static std::string strip_comment(const std::string& s) {
        bool quoted = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') quoted = !quoted;
            if (!quoted && (s[i] == '#' || s[i] == ';')) return s.substr(0, i);
        }
        return s;
    }
    static bool valid_key(const std::string& k) {
        return std::all_of(k.begin(), k.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-'; });
    }

public:
    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }
    static std::string lower(std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    }

private:
    std::string name_ = "<config>";
    std::map<std::string, ConfigEntry> entries_;
};

// ---------------------------------------------------------------------------
// tables

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> r) {
        if (r.size() != header.size()) throw std::logic_error("CsvTable: row width differs from the header");
        rows.push_back(std::move(r));
    }
    std::string str() const {
        std::string s;
        auto line = [&](const std::vector<std::string>& v) {
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
            s += "\n";
        };
        line(header);
        for (const auto& r : rows) line(r);
        return s;
    }
};

/// Reads a CSV with a header row into named numeric columns.
inline std::map<std::string, std::vector<double>> read_csv_columns(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open '" + p.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("'" + p.string() + "': empty file");
    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) names.push_back(Config::lower(Config::trim(c)));
    }
    std::map<std::string, std::vector<double>> cols;
    int ln = 1;
    while (std::getline(in, line)) {
        ++ln;
        if (Config::trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string c;
        std::size_t i = 0;
        while (std::getline(ss, c, ',')) {
            if (i >= names.size()) throw std::runtime_error(p.string() + ":" + std::to_string(ln) + ": too many fields");
            try {
                std::size_t pos = 0;
                const std::string t = Config::trim(c);
                const double v = std::stod(t, &pos);
                if (pos != t.size()) throw std::invalid_argument("");
                cols[names[i]].push_back(v);
            } catch (...) {
                throw std::runtime_error(p.string() + ":" + std::to_string(ln) + ": bad number '" + c + "'");
            }
            ++i;
        }
        if (i != names.size()) throw std::runtime_error(p.string() + ":" + std::to_string(ln) + ": expected " + std::to_string(names.size()) + " fields");
    }
    return cols;
}

/// Series CSV: columns t, x with equally spaced t.
inline SampleSeries read_series_csv(const std::filesystem::path& p) {
    auto cols = read_csv_columns(p);
    if (!cols.count("t") || !cols.count("x")) throw std::runtime_error("'" + p.string() + "': series CSV needs columns t,x");
    const auto& t = cols["t"];
    if (t.size() < 4) throw std::runtime_error("'" + p.string() + "': need at least four samples");
    SampleSeries s;
    s.h = t[1] - t[0];
    if (!(s.h > 0)) throw std::runtime_error("'" + p.string() + "': t must increase");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs(t[i] - t[i - 1] - s.h) > 1e-9 * std::max(1.0, std::abs(t[i]))) throw std::runtime_error("'" + p.string() + "': t must be equally spaced");
    s.values = cols["x"];
    return s;
}

inline std::string series_csv(const SampleSeries& s) {
    CsvTable t{{"t", "x"}, {}};
    for (std::size_t j = 0; j < s.values.size(); ++j) t.add({fmt_double(s.h * double(j)), fmt_double(s.values[j])});
    return t.str();
}

// ---------------------------------------------------------------------------
// run manifest

inline json library_versions() {
    json v;
    v["szego"] = kVersion;
    v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION);
    v["boost"] = std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." + std::to_string(BOOST_VERSION % 100);
    v["fftw"] = std::string(fftw_version);
    v["gmp"] = std::string(gmp_version);
    v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_PATCH);
#ifdef __VERSION__
    v["compiler"] = __VERSION__;
#endif
    return v;
}

/// Collects the files a command writes and emits run.json next to them.
class RunRecord {
public:
    RunRecord(std::string command, std::filesystem::path dir, const Config& cfg, std::uint64_t seed, unsigned threads)
        : command_(std::move(command)), dir_(std::move(dir)), config_hash_(cfg.hash()), canonical_(cfg.canonical()), seed_(seed),
          threads_(threads), start_(std::chrono::steady_clock::now()) {
        std::filesystem::create_directories(dir_);
    }

    const std::filesystem::path& dir() const { return dir_; }

    void write_text(const std::string& name, const std::string& content) {
        const auto p = dir_ / name;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
        out << content;
        out.close();
        outputs_.push_back({{"file", name}, {"bytes", content.size()}, {"fnv1a", hex64(fnv1a(content))}});
    }
    void write_json(const std::string& name, const json& j) { write_text(name, j.dump(2) + "\n"); }
    void write_csv(const std::string& name, const CsvTable& t) { write_text(name, t.str()); }

    /// Writes run.json; `status` is "ok", "threshold_failure" or "error".
    void finish(int exit_code, const std::string& status, const json& summary = json::object()) {
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        json r;
        r["command"] = command_;
        r["schema_version"] = kConfigSchemaVersion;
        r["config_hash"] = hex64(config_hash_);
        r["config"] = canonical_;
        r["seed"] = seed_;
        r["threads"] = threads_;
        r["versions"] = library_versions();
        r["wall_time_s"] = wall;
        r["exit_code"] = exit_code;
        r["status"] = status;
        r["outputs"] = outputs_;
        r["summary"] = summary;
        std::ofstream out(dir_ / "run.json", std::ios::binary);
        out << r.dump(2) << "\n";
    }

private:
    std::string command_;
    std::filesystem::path dir_;
    std::uint64_t config_hash_;
    std::string canonical_;
    std::uint64_t seed_;
    unsigned threads_;
    std::chrono::steady_clock::time_point start_;
    json outputs_ = json::array();
};

}  // namespace szego::io
