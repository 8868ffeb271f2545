#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fitzflow {

/// Schema violation; `field` names the offending section/key.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string f, const std::string& msg)
      : std::runtime_error("config field '" + f + "': " + msg),
        field(std::move(f)) {}
};

/// One experiment = one structured-text document: `[section]` headers and
/// `key = value` lines; `#` and `;` start comments.
class Config {
 public:
  using Section = std::map<std::string, std::string>;

  static Config parse_string(const std::string& text);
  static Config parse_file(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  const std::map<std::string, Section>& sections() const { return sections_; }

  std::string require(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double require_num(const std::string& section, const std::string& key) const;
  double get_num(const std::string& section, const std::string& key,
                 double fallback) const;
  long require_int(const std::string& section, const std::string& key) const;
  long get_int(const std::string& section, const std::string& key,
               long fallback) const;
  /// Comma-separated numeric list.
  std::vector<double> get_num_list(const std::string& section,
                                   const std::string& key) const;
  std::vector<int> get_int_list(const std::string& section,
                                const std::string& key) const;

  /// FNV-1a over the normalized (sorted section/key) content; stable across
  /// whitespace and ordering differences.
  std::uint64_t hash() const;

 private:
  std::map<std::string, Section> sections_;
};

}  // namespace fitzflow
