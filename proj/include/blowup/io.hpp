#pragma once

// Flat key = value configs, RFC-4180 CSV with 17 significant digits, and
// JSON with sorted keys. Everything written here is byte-reproducible.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "blowup/errors.hpp"
#include "blowup/verifier.hpp"

namespace blowup::io {

using json = nlohmann::json;

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto pos = s.find(',', start);
        auto item = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (!item.empty()) out.push_back(std::move(item));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Parsed key = value file. Keys are unique; lookups record which keys were
/// consumed so that typos can be reported.
class Config {
  public:
    static Config parse(std::string_view text, const std::string& origin = "<config>") {
        Config c;
        c.origin_ = origin;
        std::size_t lineno = 0, pos = 0;
        while (pos <= text.size()) {
            auto nl = text.find('\n', pos);
            std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            ++lineno;
            if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
            const auto t = trim(line);
            if (!t.empty()) {
                const auto eq = t.find('=');
                if (eq == std::string::npos)
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
                auto key = trim(std::string_view(t).substr(0, eq));
                auto val = trim(std::string_view(t).substr(eq + 1));
                if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
                if (c.values_.count(key)) throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
                c.values_[key] = val;
            }
            if (nl == std::string_view::npos) break;
            pos = nl + 1;
        }
        return c;
    }

    static Config load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path.string());
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    std::string str(const std::string& key, const std::string& def) const {
        auto it = lookup(key);
        return it ? *it : def;
    }
    std::string str(const std::string& key) const {
        auto it = lookup(key);
        if (!it) throw ConfigError(origin_ + ": missing key '" + key + "'");
        return *it;
    }
    double num(const std::string& key, double def) const {
        auto it = lookup(key);
        return it ? to_double(key, *it) : def;
    }
    double num(const std::string& key) const { return to_double(key, str(key)); }
    long integer(const std::string& key, long def) const {
        auto it = lookup(key);
        if (!it) return def;
        const double v = to_double(key, *it);
        if (v != static_cast<double>(static_cast<long>(v))) throw ConfigError(origin_ + ": '" + key + "' must be an integer");
        return static_cast<long>(v);
    }
    bool flag(const std::string& key, bool def) const {
        auto it = lookup(key);
        if (!it) return def;
        if (*it == "true" || *it == "yes" || *it == "1") return true;
        if (*it == "false" || *it == "no" || *it == "0") return false;
        throw ConfigError(origin_ + ": '" + key + "' must be true or false");
    }
    std::vector<std::string> list(const std::string& key) const {
        auto it = lookup(key);
        return it ? split_list(*it) : std::vector<std::string>{};
    }
    std::vector<double> nums(const std::string& key) const {
        std::vector<double> out;
        for (const auto& s : list(key)) out.push_back(to_double(key, s));
        return out;
    }

    std::vector<std::string> unused() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) out.push_back(k);
        return out;
    }
    const std::map<std::string, std::string>& values() const { return values_; }
    const std::string& origin() const { return origin_; }

  private:
    const std::string* lookup(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) return nullptr;
        used_[key] = true;
        return &it->second;
    }
    double to_double(const std::string& key, const std::string& v) const {
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": '" + key + "' is not a number: " + v);
        }
    }

    std::string origin_;
    std::map<std::string, std::string> values_;
    mutable std::map<std::string, bool> used_;
};

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// Buffered CSV table; rows end with CRLF as RFC 4180 asks.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) : cols_(header.size()) { row(header); }

    void row(const std::vector<std::string>& fields) {
        if (fields.size() != cols_) throw std::logic_error("csv row has wrong arity");
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) buf_ += ',';
            buf_ += csv_field(fields[i]);
        }
        buf_ += "\r\n";
    }
    void row(const std::vector<double>& values) {
        if (values.size() != cols_) throw std::logic_error("csv row has wrong arity");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) buf_ += ',';
            buf_ += fmt_double(values[i]);
        }
        buf_ += "\r\n";
    }
    const std::string& str() const { return buf_; }

  private:
    std::size_t cols_;
    std::string buf_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw ConfigError("csv has no column '" + std::string(name) + "'");
    }
    std::vector<double> numbers(std::string_view name) const {
        const auto c = column(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(std::stod(r.at(c)));
        return out;
    }
};

inline CsvTable parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            rec.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                rec.push_back(std::move(field));
                records.push_back(std::move(rec));
            }
            rec.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw ConfigError("csv: unterminated quoted field");
    if (any || !field.empty()) {
        rec.push_back(std::move(field));
        records.push_back(std::move(rec));
    }
    CsvTable t;
    if (records.empty()) throw ConfigError("csv: empty table");
    t.header = std::move(records.front());
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].size() != t.header.size()) throw ConfigError("csv: ragged row " + std::to_string(i));
        t.rows.push_back(std::move(records[i]));
    }
    return t;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("write failed for " + p.string());
}

/// Non-finite numbers become strings so the JSON stays valid.
inline json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline json to_json(const CheckReport& r) {
    json j;
    j["name"] = r.name;
    j["status"] = std::string(to_string(r.status));
    j["lhs"] = number(r.lhs);
    j["rhs"] = number(r.rhs);
    j["residual"] = number(r.residual);
    j["tolerance"] = number(r.tolerance);
    json m = json::object();
    for (const auto& [k, v] : r.metrics) m[k] = number(v);
    j["metrics"] = m;
    j["notes"] = r.notes;
    return j;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace blowup::io
