#pragma once

// Plain-text artifacts: CSV tables, JSON-lines logs, SVG charts with a
// sidecar CSV of the plotted numbers, atomic file replacement and SHA-256
// manifests.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace sfront::io {

/// Shortest representation that reads back to the same double.
std::string format_number(double x);

class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells);
  void add_numbers(const std::vector<double>& values);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  /// Column index by name. Throws ConfigError("csv") if absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> numeric_column(const std::string& name) const;

  std::string str() const;
  /// Parses the output of `str` (no quoting). Throws ConfigError("csv").
  static CsvTable parse(const std::string& text);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string sha256_hex(const std::string& bytes);

/// One compact JSON document per line, kept in memory until `commit`.
class JsonLog {
 public:
  void write(const nlohmann::json& record);
  std::string str() const;
  /// Writes the log atomically.
  void commit(const std::filesystem::path& path) const;
  std::size_t size() const { return lines_.size(); }

 private:
  std::vector<std::string> lines_;
};

struct Series {
  std::string name;
  std::vector<double> x, y;
  bool markers = true;
  bool line = true;
};

struct Plot {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  std::vector<Series> series;
  std::vector<std::string> notes;  ///< printed in the upper-left corner
};

std::string render_svg(const Plot& plot);

/// The exact plotted numbers: series, x, y.
CsvTable plot_table(const Plot& plot);

/// Writes `<stem>.svg` and `<stem>.plot.csv`; returns both paths.
std::vector<std::filesystem::path> write_plot(const std::filesystem::path& stem, const Plot& plot);

}  // namespace sfront::io
