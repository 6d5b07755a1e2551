#include "sfront/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "sfront/error.hpp"

namespace sfront::io {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("csv", "not a number: '" + s + "'");
  return v;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double x, int digits = 2) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << x;
  return o.str();
}

std::string tick_label(double v) {
  std::ostringstream o;
  o << std::setprecision(4) << v;
  return o.str();
}

}  // namespace

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw ConfigError("csv", "row width differs from header");
  rows_.push_back(std::move(cells));
}

void CsvTable::add_numbers(const std::vector<double>& values) {
  std::vector<std::string> cells;
  for (double v : values) cells.push_back(format_number(v));
  add_row(std::move(cells));
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) throw ConfigError("csv", "missing column '" + name + "'");
  return static_cast<std::size_t>(it - header_.begin());
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  for (const auto& r : rows_) out.push_back(parse_number(r[c]));
  return out;
}

std::string CsvTable::str() const {
  std::string out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out += ',';
      out += cells[k];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

CsvTable CsvTable::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv", "empty table");
  CsvTable t(split(line, ','));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.add_row(split(line, ','));
  }
  return t;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("io", "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("io", "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("io", "sha256 failed");
  std::ostringstream o;
  for (unsigned int k = 0; k < len; ++k)
    o << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[k]);
  return o.str();
}

void JsonLog::write(const nlohmann::json& record) { lines_.push_back(record.dump()); }

std::string JsonLog::str() const {
  std::string out;
  for (const auto& l : lines_) out += l + '\n';
  return out;
}

void JsonLog::commit(const std::filesystem::path& path) const { write_atomic(path, str()); }

// ---------------------------------------------------------------------------
// SVG

std::string render_svg(const Plot& plot) {
  constexpr double W = 640, H = 420, left = 80, right = 20, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  const auto tx = [&](double v) { return plot.logx ? std::log10(v) : v; };
  const auto ty = [&](double v) { return plot.logy ? std::log10(v) : v; };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series& s : plot.series) {
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      const double a = tx(s.x[k]), b = ty(s.y[k]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      x0 = std::min(x0, a), x1 = std::max(x1, a), y0 = std::min(y0, b), y1 = std::max(y1, b);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12 * std::max(1.0, std::abs(y0))) {
    const double pad = std::max(1e-6, 0.05 * std::abs(y0));
    y0 -= pad, y1 += pad;
  }
  const double yspan = y1 - y0;
  y0 -= 0.05 * yspan, y1 += 0.05 * yspan;
  const auto px = [&](double a) { return left + (a - x0) / (x1 - x0) * pw; };
  const auto py = [&](double b) { return top + (y1 - b) / (y1 - y0) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape_xml(plot.title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double a = x0 + (x1 - x0) * k / 4, b = y0 + (y1 - y0) * k / 4;
    const double xv = plot.logx ? std::pow(10.0, a) : a, yv = plot.logy ? std::pow(10.0, b) : b;
    o << "<text x=\"" << fixed(px(a)) << "\" y=\"" << fixed(top + ph + 16)
      << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
    o << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(py(b) + 4)
      << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">"
    << escape_xml(plot.xlabel) << (plot.logx ? " (log)" : "") << "</text>\n";
  o << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << top + ph / 2 << ")\">" << escape_xml(plot.ylabel) << (plot.logy ? " (log)" : "")
    << "</text>\n";

  for (std::size_t s = 0; s < plot.series.size(); ++s) {
    const Series& ser = plot.series[s];
    const char* col = colors[s % 6];
    std::ostringstream pts;
    for (std::size_t k = 0; k < ser.x.size() && k < ser.y.size(); ++k) {
      const double a = tx(ser.x[k]), b = ty(ser.y[k]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      pts << fixed(px(a)) << ',' << fixed(py(b)) << ' ';
      if (ser.markers)
        o << "<circle cx=\"" << fixed(px(a)) << "\" cy=\"" << fixed(py(b))
          << "\" r=\"3\" fill=\"" << col << "\"/>\n";
    }
    if (ser.line)
      o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\""
        << pts.str() << "\"/>\n";
    o << "<text x=\"" << W - right - 6 << "\" y=\"" << top + 16 + 14 * s
      << "\" text-anchor=\"end\" fill=\"" << col << "\">" << escape_xml(ser.name) << "</text>\n";
  }
  for (std::size_t k = 0; k < plot.notes.size(); ++k)
    o << "<text x=\"" << left + 8 << "\" y=\"" << top + 16 + 14 * k << "\">"
      << escape_xml(plot.notes[k]) << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

CsvTable plot_table(const Plot& plot) {
  CsvTable t({"series", "x", "y"});
  for (const Series& s : plot.series)
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k)
      t.add_row({s.name, format_number(s.x[k]), format_number(s.y[k])});
  return t;
}

std::vector<std::filesystem::path> write_plot(const std::filesystem::path& stem, const Plot& plot) {
  std::filesystem::path svg = stem, csv = stem;
  svg += ".svg";
  csv += ".plot.csv";
  write_atomic(csv, plot_table(plot).str());
  write_atomic(svg, render_svg(plot));
  return {svg, csv};
}

}  // namespace sfront::io
