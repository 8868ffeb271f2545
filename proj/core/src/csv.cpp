#include "fitzflow/csv.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace fitzflow {

std::string format_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // canonicalize -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << content;
    if (!out.good()) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("rename failed: " + target.string() + ": " + ec.message());
}

CsvWriter::CsvWriter(std::vector<std::string> columns)
    : columns_(std::move(columns)) {}

void CsvWriter::add_row(const std::vector<double>& cells) {
  std::vector<std::string> raw;
  raw.reserve(cells.size());
  for (double c : cells) raw.push_back(format_num(c));
  add_row_raw(raw);
}

void CsvWriter::add_row_raw(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size())
    throw IoError("csv row arity mismatch");
  rows_.push_back(cells);
}

std::string CsvWriter::body(std::uint64_t config_hash, unsigned seed) const {
  char head[80];
  std::snprintf(head, sizeof head, "# config=%016" PRIx64 " seed=%u\n",
                config_hash, seed);
  std::string out(head);
  for (size_t i = 0; i < columns_.size(); ++i)
    out += (i ? "," : "") + columns_[i];
  out += '\n';
  for (const auto& row : rows_) {
    for (size_t i = 0; i < row.size(); ++i)
      out += (i ? "," : "") + row[i];
    out += '\n';
  }
  return out;
}

void CsvWriter::write(const std::string& path, std::uint64_t config_hash,
                      unsigned seed) const {
  write_text_atomic(path, body(config_hash, seed));
}

void write_plot_data(const std::string& path,
                     const std::vector<std::pair<double, double>>& points,
                     std::uint64_t config_hash, unsigned seed) {
  char head[80];
  std::snprintf(head, sizeof head, "# config=%016" PRIx64 " seed=%u\n",
                config_hash, seed);
  std::string out(head);
  for (auto [x, y] : points)
    out += format_num(x) + " " + format_num(y) + "\n";
  write_text_atomic(path, out);
}

}  // namespace fitzflow
