#pragma once

// Flat key = value experiment configuration with dotted keys.

#include "geoflow/errors.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

namespace geoflow {

class Config {
 public:
  Config() = default;

  /// Lines "key = value"; '#' starts a comment.
  static Config parse(std::istream& in, const std::string& source = "<config>") {
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
      const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
      if (!c.values_.emplace(key, value).second)
        throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    return c;
  }

  static Config parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse(in, path);
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    const auto it = values_.find(key);
    const T v = it == values_.end() ? fallback : convert<T>(key, it->second);
    echo_[key] = format(v);
    return v;
  }

  template <class T>
  T require(const std::string& key, const std::string& why = "") {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("config field '" + key + "' is required" + (why.empty() ? "" : " " + why));
    const T v = convert<T>(key, it->second);
    echo_[key] = format(v);
    return v;
  }

  /// Keys beginning with prefix; they count as used.
  std::vector<std::pair<std::string, std::string>> with_prefix(const std::string& prefix) {
    std::vector<std::pair<std::string, std::string>> out;
    for (auto it = values_.lower_bound(prefix); it != values_.end() && it->first.rfind(prefix, 0) == 0; ++it) {
      out.emplace_back(*it);
      echo_[it->first] = it->second;
    }
    return out;
  }

  /// Keys present in the file that no parser consumed.
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!echo_.count(k)) out.push_back(k);
    return out;
  }

  void require_all_used() const {
    const auto u = unused();
    if (!u.empty()) throw ConfigError("unknown config field '" + u.front() + "'");
  }

  /// Every value the run used, defaults included, in canonical form.
  const std::map<std::string, std::string>& echo() const { return echo_; }

  std::string echo_text() const {
    std::string s;
    for (const auto& [k, v] : echo_) s += k + " = " + v + "\n";
    return s;
  }

  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }
  static std::string format(int v) { return std::to_string(v); }
  static std::string format(std::uint64_t v) { return std::to_string(v); }
  static std::string format(bool v) { return v ? "true" : "false"; }
  static std::string format(const std::string& v) { return v; }
  template <class T>
  static std::string format(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format(v[i]);
    return s;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
  }

  template <class T>
  static T convert(const std::string& key, const std::string& text) {
    auto bad = [&](const char* what) {
      return ConfigError("config field '" + key + "': expected " + what + ", got '" + text + "'");
    };
    if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw bad("true or false");
    } else if constexpr (std::is_arithmetic_v<T>) {
      T v{};
      const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || p != text.data() + text.size())
        throw bad(std::is_floating_point_v<T> ? "a number" : "an integer");
      return v;
    } else {
      T out;
      std::string item;
      std::istringstream in(text);
      while (std::getline(in, item, ',')) out.push_back(convert<typename T::value_type>(key, trim(item)));
      return out;
    }
  }

  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> echo_;
};

}  // namespace geoflow
