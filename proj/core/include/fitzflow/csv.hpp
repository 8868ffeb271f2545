#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fitzflow {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic numeric formatting (%.12g, canonical "-0"/"inf" handling);
/// identical inputs ⟹ identical bytes.
std::string format_num(double v);

/// Atomic write: temp file in the target directory, then rename.
void write_text_atomic(const std::string& path, const std::string& content);

/// CSV artifact: one comment line with config hash and seed, a header row,
/// then rows of %.12g cells.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);

  void add_row(const std::vector<double>& cells);
  void add_row_raw(const std::vector<std::string>& cells);

  /// Full file body (deterministic).
  std::string body(std::uint64_t config_hash, unsigned seed) const;
  void write(const std::string& path, std::uint64_t config_hash,
             unsigned seed) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Two-column plain-text plot data with the same comment header.
void write_plot_data(const std::string& path,
                     const std::vector<std::pair<double, double>>& points,
                     std::uint64_t config_hash, unsigned seed);

}  // namespace fitzflow
