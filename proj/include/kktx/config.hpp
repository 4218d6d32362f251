#pragma once

// Flat "section.key" configuration store read from INI-style text or from
// the config echo of a run manifest.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kktx {

class Config {
 public:
  /// Parses `[section]` headers and `key = value` lines. `;` and `#` start
  /// comments. Throws ConfigError with the line number on malformed input.
  static Config parse(const std::string& text, const std::string& origin = "<string>");
  /// Reads an INI file, or a run manifest when the file holds a JSON object.
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  /// Applies "section.key=value".
  void apply_override(const std::string& assignment);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated values; each item may be a range "start:step:stop"
  /// (inclusive of stop within half a step).
  std::vector<double> get_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  /// Keys that were set but never read.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> touched_;

  std::optional<std::string> lookup(const std::string& key) const;
};

double parse_double(const std::string& text, const std::string& what);
std::vector<double> parse_list(const std::string& text, const std::string& what);

}  // namespace kktx
