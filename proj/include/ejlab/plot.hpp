/*
 * Copyright 2026 The ejlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ejlab/error.hpp"

namespace ejlab {

/// A parsed CSV file: the manifest hash from its comment line (if any), the header
/// columns, and the data rows as strings.
struct CsvTable {
  std::string manifest;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw FormatError("csv has no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# manifest=";
      if (line.rfind(key, 0) == 0) t.manifest = line.substr(key.size());
      continue;
    }
    if (t.columns.empty()) {
      t.columns = split_csv_line(line);
      continue;
    }
    auto row = split_csv_line(line);
    if (row.size() != t.columns.size()) throw FormatError("csv row has " + std::to_string(row.size()) + " cells");
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw FormatError("csv has no header");
  return t;
}

/// Series name -> (x, y) points, x ascending.
using SeriesMap = std::map<std::string, std::vector<std::pair<double, double>>>;

/// Mean of column y grouped by (series column, x column).
inline SeriesMap aggregate(const CsvTable& t, const std::string& series, const std::string& x, const std::string& y) {
  const auto si = t.column(series), xi = t.column(x), yi = t.column(y);
  std::map<std::string, std::map<double, std::pair<double, int>>> acc;
  for (const auto& r : t.rows) {
    auto& cell = acc[r[si]][std::stod(r[xi])];
    cell.first += std::stod(r[yi]);
    ++cell.second;
  }
  SeriesMap out;
  for (const auto& [name, points] : acc) {
    for (const auto& [px, sum] : points) out[name].emplace_back(px, sum.first / sum.second);
  }
  return out;
}

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  SeriesMap series;
  std::string manifest;
  bool unit_y = false;  // fix the y axis to [0, 1]
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

/// Roughly five round tick values covering [lo, hi].
inline std::vector<double> ticks(double lo, double hi) {
  const double span = hi > lo ? hi - lo : 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + 1e-9 * step; v += step) out.push_back(v);
  return out;
}

}  // namespace detail

/// Renders a line chart as a standalone SVG document. The manifest hash goes into
/// the <metadata> element.
inline std::string render_svg(const LineChart& chart) {
  constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 60;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const auto& [name, pts] : chart.series) {
    for (const auto& [x, y] : pts) {
      if (first) x0 = x1 = x, y0 = y1 = y, first = false;
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  }
  if (chart.unit_y) y0 = 0, y1 = 1;
  else y0 = std::min(0.0, y0), y1 = y1 > y0 ? y1 * 1.05 : y0 + 1;
  if (x1 <= x0) x1 = x0 + 1;
  const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  using detail::num;
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<metadata>manifest=" << detail::xml_escape(chart.manifest) << "</metadata>\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << num((L + W - R) / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
    << detail::xml_escape(chart.title) << "</text>\n"
    << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double v : detail::ticks(x0, x1)) {
    s << "<line x1=\"" << num(px(v)) << "\" y1=\"" << H - B << "\" x2=\"" << num(px(v)) << "\" y2=\"" << H - B + 5
      << "\" stroke=\"black\"/><text x=\"" << num(px(v)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
      << detail::tick(v) << "</text>\n";
  }
  for (double v : detail::ticks(y0, y1)) {
    s << "<line x1=\"" << L - 5 << "\" y1=\"" << num(py(v)) << "\" x2=\"" << W - R << "\" y2=\"" << num(py(v))
      << "\" stroke=\"#dddddd\"/><text x=\"" << L - 8 << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\">"
      << detail::tick(v) << "</text>\n";
  }
  s << "<text x=\"" << num((L + W - R) / 2) << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
    << detail::xml_escape(chart.x_label) << "</text>\n"
    << "<text transform=\"translate(18 " << num((T + H - B) / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << detail::xml_escape(chart.y_label) << "</text>\n";
  std::size_t k = 0;
  for (const auto& [name, pts] : chart.series) {
    const char* color = kColors[k % (sizeof kColors / sizeof *kColors)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) s << (i ? " " : "") << num(px(pts[i].first)) << ',' << num(py(pts[i].second));
    s << "\"/>\n";
    for (const auto& [x, y] : pts) {
      s << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = T + 16 + 20.0 * static_cast<double>(k);
    s << "<line x1=\"" << W - R + 12 << "\" y1=\"" << num(ly) << "\" x2=\"" << W - R + 36 << "\" y2=\"" << num(ly)
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/><text x=\"" << W - R + 42 << "\" y=\"" << num(ly + 4)
      << "\">" << detail::xml_escape(name) << "</text>\n";
    ++k;
  }
  s << "</svg>\n";
  return s.str();
}

/// Output file stem and chart for every metric in a reachability or throughput CSV.
inline std::vector<std::pair<std::string, LineChart>> charts_for(const CsvTable& t, const std::string& fallback_manifest = {}) {
  const std::string manifest = t.manifest.empty() ? fallback_manifest : t.manifest;
  std::vector<std::pair<std::string, LineChart>> out;
  const auto has = [&](const char* c) { return std::find(t.columns.begin(), t.columns.end(), c) != t.columns.end(); };
  if (has("normalized_throughput")) {
    out.push_back({"throughput", {"Delivery Throughput over Network Load", "Offered Load (packets/node/cycle)",
                                  "Normalized Throughput", aggregate(t, "engine", "load", "normalized_throughput"),
                                  manifest, true}});
    return out;
  }
  const std::string x = "Number of Faulty Nodes";
  out.push_back({"avg_distance", {"Average Distance Routing Cost", x, "Average Distance (hops)",
                                  aggregate(t, "engine", "fault_count", "avg_distance"), manifest, false}});
  out.push_back({"pdr", {"Packet Delivery Ratio", x, "Packet Delivery Ratio",
                         aggregate(t, "engine", "fault_count", "pdr"), manifest, true}});
  out.push_back({"err", {"Effective Reachability Ratio", x, "Effective Reachability Ratio",
                         aggregate(t, "engine", "fault_count", "err"), manifest, true}});
  return out;
}

}  // namespace ejlab
