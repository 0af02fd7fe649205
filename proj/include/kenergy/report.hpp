#pragma once

#include <algorithm>
#include <chrono>
#include <cctype>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kenergy/util.hpp"

namespace kenergy {

/// Flat key-value run configuration.
///
/// Text format: one `key = value` pair per line; `#` starts a comment
/// anywhere on a line; blank lines are ignored; whitespace around keys and
/// values is trimmed. Keys are restricted to [A-Za-z0-9_.-]. Later
/// assignments to the same key overwrite earlier ones, so
/// parse(serialize(parse(text))) == parse(text) for every valid input.
struct RunConfig {
  std::vector<std::pair<std::string, std::string>> entries;  // insertion order, unique keys

  static bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-'))
        return false;
    return true;
  }

  static std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
  }

  static RunConfig parse(const std::string& text) {
    RunConfig cfg;
    std::size_t pos = 0, line_no = 0;
    while (pos <= text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string::npos) eol = text.size();
      std::string line = text.substr(pos, eol - pos);
      pos = eol + 1;
      ++line_no;
      if (std::size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      line = trim(line);
      if (line.empty()) continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (!valid_key(key))
        throw ConfigError("config line " + std::to_string(line_no) + ": bad key '" + key + "'");
      cfg.set(key, value);
      if (pos > text.size()) break;
    }
    return cfg;
  }

  std::string serialize() const {
    std::string out;
    for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
    return out;
  }

  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return &v;
    return nullptr;
  }
  bool has(const std::string& key) const { return find(key) != nullptr; }

  void set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries)
      if (k == key) {
        v = value;
        return;
      }
    entries.emplace_back(key, value);
  }

  std::string get(const std::string& key, const std::string& fallback = "") const {
    const std::string* v = find(key);
    return v ? *v : fallback;
  }

  int get_int(const std::string& key, int fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      const int r = std::stoi(*v, &used);
      if (used != v->size()) throw std::invalid_argument(*v);
      return r;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': expected an integer, got '" + *v + "'");
    }
  }

  double get_double(const std::string& key, double fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      const double r = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument(*v);
      return r;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': expected a number, got '" + *v + "'");
    }
  }

  /// Comma-separated doubles ("0.2,-0.1,0.05").
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= v->size()) {
      std::size_t comma = v->find(',', pos);
      if (comma == std::string::npos) comma = v->size();
      const std::string item = trim(v->substr(pos, comma - pos));
      if (!item.empty()) {
        try {
          std::size_t used = 0;
          out.push_back(std::stod(item, &used));
          if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
          throw ConfigError("config key '" + key + "': bad number '" + item + "'");
        }
      }
      pos = comma + 1;
      if (pos > v->size()) break;
    }
    return out;
  }
};

/// One quantitative check: a left-hand value, a right-hand value, both error
/// measures, the tolerance it was judged against, and where it ran.
struct CheckRecord {
  std::string id;      // hierarchical slug, e.g. "theorem1/path-independence/radial-a"
  std::string anchor;  // suite anchor the check belongs to, or "plumbing"
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  double tolerance = 0.0;
  std::string mode;  // "abs" or "rel": which error the tolerance bounds
  bool pass = false;
  std::string grid;  // e.g. "cp1 48x24"
  double wall_ms = 0.0;
};

inline double relative_error(double lhs, double rhs) {
  const double abs = std::abs(lhs - rhs);
  const double denom = std::max(std::abs(lhs), std::abs(rhs));
  return denom > 0.0 ? abs / denom : 0.0;
}

struct WallTimer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

/// A full run: the configuration it was launched with, its command, and the
/// check records. `pass` aggregates over all records.
struct Report {
  std::string command;
  RunConfig config;
  std::vector<CheckRecord> records;
  double tolerance_scale = 1.0;  // verify --tol multiplies every tolerance

  bool all_pass() const {
    return std::all_of(records.begin(), records.end(),
                       [](const CheckRecord& r) { return r.pass; });
  }

  CheckRecord& add(std::string id, std::string anchor, double lhs, double rhs, double tol,
                   bool relative, std::string grid, double wall_ms = 0.0) {
    CheckRecord r;
    r.id = std::move(id);
    r.anchor = std::move(anchor);
    r.lhs = lhs;
    r.rhs = rhs;
    r.abs_err = std::abs(lhs - rhs);
    r.rel_err = relative_error(lhs, rhs);
    r.tolerance = tol * tolerance_scale;
    r.mode = relative ? "rel" : "abs";
    r.pass = (relative ? r.rel_err : r.abs_err) <= r.tolerance;
    r.grid = std::move(grid);
    r.wall_ms = wall_ms;
    records.push_back(std::move(r));
    return records.back();
  }

  /// For checks whose pass criterion is not a plain error bound (step
  /// budgets, monotonicity flags). lhs/rhs stay informational.
  CheckRecord& add_raw(CheckRecord r) {
    r.tolerance *= tolerance_scale;
    records.push_back(std::move(r));
    return records.back();
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["tool"] = "kenergy";
    j["command"] = command;
    nlohmann::ordered_json jc = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config.entries) jc[k] = v;
    j["config"] = std::move(jc);
    j["records"] = nlohmann::ordered_json::array();
    for (const auto& r : records) {
      nlohmann::ordered_json jr;
      jr["id"] = r.id;
      jr["anchor"] = r.anchor;
      jr["lhs"] = r.lhs;
      jr["rhs"] = r.rhs;
      jr["abs_err"] = r.abs_err;
      jr["rel_err"] = r.rel_err;
      jr["tolerance"] = r.tolerance;
      jr["mode"] = r.mode;
      jr["pass"] = r.pass;
      jr["grid"] = r.grid;
      jr["wall_ms"] = r.wall_ms;
      j["records"].push_back(std::move(jr));
    }
    j["pass"] = all_pass();
    return j;
  }

  /// Fixed-width human summary, one line per record plus a verdict line.
  std::string table() const {
    std::string out;
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%-4s  %-52s  %12s  %12s  %9s  %9s  %s\n", "", "check", "lhs",
                  "rhs", "err", "tol", "grid");
    out += buf;
    for (const auto& r : records) {
      const double err = (r.mode == "rel") ? r.rel_err : r.abs_err;
      std::snprintf(buf, sizeof(buf), "%-4s  %-52s  %12.5g  %12.5g  %9.2e  %9.2e  %s\n",
                    r.pass ? "PASS" : "FAIL", r.id.c_str(), r.lhs, r.rhs, err, r.tolerance,
                    r.grid.c_str());
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), "%zu checks, %zu failed -> %s\n", records.size(),
                  static_cast<std::size_t>(
                      std::count_if(records.begin(), records.end(),
                                    [](const CheckRecord& r) { return !r.pass; })),
                  all_pass() ? "PASS" : "FAIL");
    out += buf;
    return out;
  }
};

}  // namespace kenergy
