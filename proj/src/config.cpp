#include "kktx/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kktx/errors.hpp"

namespace kktx {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find_first_of(";#");
  return pos == std::string::npos ? line : line.substr(0, pos);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(what + ": expected a number, got '" + text + "'");
  }
  return value;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (item.find(':') == std::string::npos) {
      out.push_back(parse_double(item, what));
      continue;
    }
    std::vector<std::string> parts;
    std::stringstream rs(item);
    std::string p;
    while (std::getline(rs, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError(what + ": range must be start:step:stop");
    const double start = parse_double(parts[0], what);
    const double step = parse_double(parts[1], what);
    const double stop = parse_double(parts[2], what);
    if (!(step > 0.0) || stop < start) {
      throw ConfigError(what + ": range needs a positive step and stop >= start");
    }
    const auto count = static_cast<long long>(std::floor((stop - start) / step + 0.5));
    if (count > 100000) throw ConfigError(what + ": range has too many points");
    for (long long i = 0; i <= count; ++i) out.push_back(start + static_cast<double>(i) * step);
  }
  return out;
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  std::stringstream ss(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = lower(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (section.empty()) throw ConfigError(where + ": key outside of any section");
    const std::string full = section + "." + key;
    if (cfg.has(full)) throw ConfigError(where + ": duplicate key " + full);
    cfg.set(full, trim(line.substr(eq + 1)));
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const std::string head = trim(text);
  if (!head.empty() && head.front() == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path + ": invalid manifest JSON: " + e.what());
    }
    if (!doc.contains("config") || !doc["config"].is_object()) {
      throw ConfigError(path + ": manifest has no config object");
    }
    Config cfg;
    for (const auto& [k, v] : doc["config"].items()) {
      if (!v.is_string()) throw ConfigError(path + ": manifest config values must be strings");
      cfg.set(k, v.get<std::string>());
    }
    return cfg;
  }
  return parse(text, path);
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must be section.key=value: " + assignment);
  const std::string key = lower(trim(assignment.substr(0, eq)));
  if (key.find('.') == std::string::npos) {
    throw ConfigError("override key must be section.key: " + assignment);
  }
  set(key, trim(assignment.substr(eq + 1)));
}

std::optional<std::string> Config::lookup(const std::string& key) const {
  touched_[key] = true;
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return lookup(key).value_or(fallback);
}

std::string Config::require_string(const std::string& key) const {
  const auto v = lookup(key);
  if (!v) throw ConfigError("missing required key " + key);
  return *v;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto v = lookup(key);
  return v ? parse_double(*v, key) : fallback;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  const auto v = lookup(key);
  if (!v) return fallback;
  const std::string t = trim(*v);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    // Accept exact integral values written in floating-point notation (2e3).
    const double d = parse_double(t, key);
    if (std::floor(d) != d || std::abs(d) > 9e15) {
      throw ConfigError(key + ": expected an integer, got '" + *v + "'");
    }
    return static_cast<std::int64_t>(d);
  }
  return value;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto v = lookup(key);
  if (!v) return fallback;
  const std::string t = lower(trim(*v));
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw ConfigError(key + ": expected a boolean, got '" + *v + "'");
}

std::vector<double> Config::get_list(const std::string& key) const {
  const auto v = lookup(key);
  return v ? parse_list(*v, key) : std::vector<double>{};
}

std::vector<std::string> Config::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (!touched_.count(k)) out.push_back(k);
  }
  return out;
}

}  // namespace kktx
