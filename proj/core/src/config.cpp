#include "fitzflow/config.hpp"

#include <fstream>
#include <sstream>

namespace fitzflow {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& field, const std::string& s) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a number, got '" + s + "'");
  }
}

long parse_long(const std::string& field, const std::string& s) {
  try {
    size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected an integer, got '" + s + "'");
  }
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno),
                          "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("line " + std::to_string(lineno),
                          "empty section name");
      cfg.sections_[section];
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno),
                        "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno), "empty key");
    cfg.sections_[section][key] = val;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError(path, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) > 0;
}

std::string Config::require(const std::string& section,
                            const std::string& key) const {
  auto it = sections_.find(section);
  if (it == sections_.end() || !it->second.count(key))
    throw ConfigError(section + "." + key, "required key missing");
  return it->second.at(key);
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
  return has(section, key) ? sections_.at(section).at(key) : fallback;
}

double Config::require_num(const std::string& section,
                           const std::string& key) const {
  return parse_double(section + "." + key, require(section, key));
}

double Config::get_num(const std::string& section, const std::string& key,
                       double fallback) const {
  if (!has(section, key)) return fallback;
  return parse_double(section + "." + key, sections_.at(section).at(key));
}

long Config::require_int(const std::string& section,
                         const std::string& key) const {
  return parse_long(section + "." + key, require(section, key));
}

long Config::get_int(const std::string& section, const std::string& key,
                     long fallback) const {
  if (!has(section, key)) return fallback;
  return parse_long(section + "." + key, sections_.at(section).at(key));
}

std::vector<double> Config::get_num_list(const std::string& section,
                                         const std::string& key) const {
  std::vector<double> out;
  std::string raw = require(section, key);
  std::istringstream in(raw);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty())
      out.push_back(parse_double(section + "." + key, item));
  }
  if (out.empty())
    throw ConfigError(section + "." + key, "expected a non-empty list");
  return out;
}

std::vector<int> Config::get_int_list(const std::string& section,
                                      const std::string& key) const {
  std::vector<int> out;
  for (double v : get_num_list(section, key)) out.push_back((int)v);
  return out;
}

std::uint64_t Config::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0x1f;
    h *= 1099511628211ULL;
  };
  for (const auto& [sec, kv] : sections_) {
    feed(sec);
    for (const auto& [k, v] : kv) {
      feed(k);
      feed(v);
    }
  }
  return h;
}

}  // namespace fitzflow
