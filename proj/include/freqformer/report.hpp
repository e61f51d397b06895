#pragma once

// CSV cell formatting and a dependency-free log-log SVG line chart.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "freqformer/perf_model.hpp"

namespace freqformer {

inline std::string format_fixed(double v, int decimals) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) {
    if (!s.empty() && s[0] == '-') s.erase(0, 1);  // no negative zero
  }
  return s;
}

/// Integers verbatim; non-integral counts (general N) to 4 decimals.
inline std::string format_count(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.007199254740992e15) return format_fixed(v, 0);
  return format_fixed(v, 4);
}

inline std::string format_cell(CellKind kind, double v) {
  switch (kind) {
    case CellKind::count: return format_count(v);
    case CellKind::ratio2: return format_fixed(v, 2);
    case CellKind::ratio4: return format_fixed(v, 4);
    case CellKind::ms: return format_fixed(v, 4);
    case CellKind::rate: return format_fixed(std::round(v), 0);
    case CellKind::gib: return format_fixed(v, 4);
  }
  return format_fixed(v, 6);
}

inline std::string format_deviation(double pct) { return format_fixed(pct, 4); }

/// Plain CSV table: header plus rows, LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::string report_csv(const TableReport& rep) {
  CsvTable csv({"table", "key", "column", "computed", "published", "deviation_pct"});
  for (const auto& r : rep.rows) {
    csv.add({std::to_string(r.table), format_count(r.key), r.column, format_cell(r.kind, r.computed),
             format_cell(r.kind, r.published), format_deviation(r.deviation())});
  }
  return csv.str();
}

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, y), both > 0
  bool markers_only = false;
};

struct PlotGuide {
  std::vector<std::pair<double, double>> points;  // dashed reference line (e.g. roofline)
};

/// Log-log chart with decade grid lines.
inline std::string svg_loglog_chart(const std::string& title, const std::string& x_label,
                                    const std::string& y_label, const std::vector<PlotSeries>& series,
                                    const std::vector<PlotGuide>& guides = {}) {
  constexpr double width = 720, height = 480, left = 90, right = 170, top = 50, bottom = 60;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto extend = [&](double x, double y) {
    if (!(x > 0) || !(y > 0)) return;
    x0 = std::min(x0, std::log10(x));
    x1 = std::max(x1, std::log10(x));
    y0 = std::min(y0, std::log10(y));
    y1 = std::max(y1, std::log10(y));
  };
  for (const auto& s : series)
    for (auto [x, y] : s.points) extend(x, y);
  for (const auto& g : guides)
    for (auto [x, y] : g.points) extend(x, y);
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  x0 = std::floor(x0), x1 = std::max(std::ceil(x1), x0 + 1);
  y0 = std::floor(y0), y1 = std::max(std::ceil(y1), y0 + 1);

  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (std::log10(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + ph - (std::log10(y) - y0) / (y1 - y0) * ph; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(2);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  for (int d = static_cast<int>(x0); d <= static_cast<int>(x1); ++d) {
    const double x = left + (d - x0) / (x1 - x0) * pw;
    o << "<line x1=\"" << x << "\" y1=\"" << top << "\" x2=\"" << x << "\" y2=\"" << top + ph
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << x << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (int d = static_cast<int>(y0); d <= static_cast<int>(y1); ++d) {
    const double y = top + ph - (d - y0) / (y1 - y0) * ph;
    o << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + pw << "\" y2=\"" << y
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">" << x_label
    << "</text>\n";
  o << "<text transform=\"translate(20," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << y_label
    << "</text>\n";
  for (const auto& g : guides) {
    o << "<polyline fill=\"none\" stroke=\"#555\" stroke-dasharray=\"6,4\" points=\"";
    for (auto [x, y] : g.points)
      if (x > 0 && y > 0) o << px(x) << "," << py(y) << " ";
    o << "\"/>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = colors[i % 6];
    if (!s.markers_only) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (auto [x, y] : s.points)
        if (x > 0 && y > 0) o << px(x) << "," << py(y) << " ";
      o << "\"/>\n";
    }
    for (auto [x, y] : s.points) {
      if (!(x > 0 && y > 0)) continue;
      o << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
    }
    const double ly = top + 16 + 20 * static_cast<double>(i);
    o << "<rect x=\"" << left + pw + 14 << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\"12\" fill=\"" << color
      << "\"/>\n";
    o << "<text x=\"" << left + pw + 32 << "\" y=\"" << ly + 1 << "\">" << s.name << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace freqformer
