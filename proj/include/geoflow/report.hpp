#pragma once

// Experiment reports: ordered JSON with floats at 17 significant digits, and
// CSV tables.

#include "geoflow/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace geoflow {

using Json = nlohmann::ordered_json;

inline constexpr const char* kArtifactVersion = "0.1.0";

struct Verdict {
  std::string name;
  double value = 0.0;
  std::string relation;  ///< "<=", ">=", "<" or ">"
  double threshold = 0.0;
  bool pass = false;
};

inline Verdict make_verdict(std::string name, double value, std::string relation, double threshold) {
  bool pass = false;
  if (relation == "<=") pass = value <= threshold;
  else if (relation == ">=") pass = value >= threshold;
  else if (relation == "<") pass = value < threshold;
  else if (relation == ">") pass = value > threshold;
  else throw PreconditionError("unknown verdict relation '" + relation + "'");
  return {std::move(name), value, std::move(relation), threshold, pass};
}

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;

  void add(std::vector<Json> row) {
    if (row.size() != columns.size()) throw PreconditionError("table '" + name + "': row width mismatch");
    rows.push_back(std::move(row));
  }
};

struct ExperimentReport {
  std::string subcommand;
  Json config = Json::object();
  std::deque<Table> tables;  ///< deque: references from table() stay valid
  Json results = Json::object();
  std::vector<Verdict> verdicts;

  bool pass() const {
    for (const auto& v : verdicts)
      if (!v.pass) return false;
    return true;
  }

  Table& table(const std::string& name, std::vector<std::string> columns) {
    tables.push_back({name, std::move(columns), {}});
    return tables.back();
  }

  Json to_json() const {
    Json j;
    j["artifact"] = "geoflow";
    j["version"] = kArtifactVersion;
    j["subcommand"] = subcommand;
    j["config"] = config;
    Json t = Json::object();
    for (const auto& tab : tables) {
      Json rows = Json::array();
      for (const auto& r : tab.rows) {
        Json o = Json::object();
        for (std::size_t c = 0; c < r.size(); ++c) o[tab.columns[c]] = r[c];
        rows.push_back(std::move(o));
      }
      t[tab.name] = std::move(rows);
    }
    j["tables"] = std::move(t);
    j["results"] = results;
    Json v = Json::array();
    for (const auto& x : verdicts)
      v.push_back({{"name", x.name}, {"value", x.value}, {"relation", x.relation}, {"threshold", x.threshold},
                   {"pass", x.pass}});
    j["verdicts"] = std::move(v);
    j["pass"] = pass();
    return j;
  }
};

namespace detail {

inline std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void dump(const Json& j, std::string& out, int indent) {
  const std::string pad(std::size_t(indent + 2), ' '), close(std::size_t(indent), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(k).dump() + ": ";
        dump(v, out, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump(j[i], out, indent + 2);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_number(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

inline std::string csv_cell(const Json& v) {
  if (v.is_number_float()) {
    const double d = v.get<double>();
    return std::isfinite(d) ? format_number(d) : (std::isnan(d) ? "nan" : (d > 0 ? "inf" : "-inf"));
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  if (v.is_null()) return "";
  return v.dump();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

}  // namespace detail

/// Pretty JSON with stable key order; non-finite floats become null.
inline std::string to_json_text(const Json& j) {
  std::string s;
  detail::dump(j, s, 0);
  return s + "\n";
}

inline std::string to_csv_text(const Table& t) {
  std::string s;
  for (std::size_t c = 0; c < t.columns.size(); ++c) s += (c ? "," : "") + t.columns[c];
  s += "\n";
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) s += (c ? "," : "") + detail::csv_cell(r[c]);
    s += "\n";
  }
  return s;
}

/// Writes report.json and tables/<name>.csv under dir.
inline void emit_report(const ExperimentReport& r, const std::filesystem::path& dir) {
  detail::write_file(dir / "report.json", to_json_text(r.to_json()));
  for (const auto& t : r.tables) detail::write_file(dir / "tables" / (t.name + ".csv"), to_csv_text(t));
}

}  // namespace geoflow
