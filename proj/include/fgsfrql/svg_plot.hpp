#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fgsfrql/common.hpp"

namespace fgsfrql {

// Small deterministic SVG chart writer: identical inputs give byte-identical
// files. Coordinates are formatted with fixed precision and no locale
// dependence.

namespace svg {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct LineSeries {
  std::string label;
  std::string color;
  Vec x;
  Vec y;
  Vec band_lo;  // optional; same length as x when present
  Vec band_hi;
};

struct BarSeries {
  std::string label;
  std::string color;
  Vec values;  // one per category
  Vec errors;  // optional error bars
};

struct Range {
  double lo = 0.0;
  double hi = 1.0;
  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double span() const { return hi - lo == 0.0 ? 1.0 : hi - lo; }
};

inline void write_header(std::ostream& os, int w, int h) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
     << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
}

inline void write_text(std::ostream& os, double x, double y, const std::string& text, int size,
                       const std::string& anchor = "middle") {
  os << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" font-size=\""
     << size << "\" text-anchor=\"" << anchor << "\">" << text << "</text>\n";
}

}  // namespace svg

inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::string& xlabel, const std::string& ylabel,
                             const std::vector<svg::LineSeries>& series) {
  if (series.empty()) throw UsageError("line chart: no input series");
  const int W = 900, H = 540;
  const double L = 70, R = 180, T = 50, B = 60;
  svg::Range xr, yr;
  bool first = true;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw ShapeError("line chart: x/y length mismatch");
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xr.lo = xr.hi = s.x[i];
        yr.lo = yr.hi = s.y[i];
        first = false;
      }
      xr.include(s.x[i]);
      yr.include(s.y[i]);
      if (!s.band_lo.empty()) {
        yr.include(s.band_lo[i]);
        yr.include(s.band_hi[i]);
      }
    }
  }
  auto px = [&](double x) { return L + (x - xr.lo) / xr.span() * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - yr.lo) / yr.span() * (H - T - B); };

  std::ostringstream os;
  svg::write_header(os, W, H);
  svg::write_text(os, (L + W - R) / 2.0, 25, title, 16);
  svg::write_text(os, (L + W - R) / 2.0, H - 15, xlabel, 12);
  os << "<g transform=\"rotate(-90 20 " << svg::num((T + H - B) / 2.0) << ")\">\n";
  svg::write_text(os, 20, (T + H - B) / 2.0, ylabel, 12);
  os << "</g>\n";
  // axes + ticks
  os << "<line x1=\"" << svg::num(L) << "\" y1=\"" << svg::num(H - B) << "\" x2=\""
     << svg::num(W - R) << "\" y2=\"" << svg::num(H - B) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << svg::num(L) << "\" y1=\"" << svg::num(T) << "\" x2=\"" << svg::num(L)
     << "\" y2=\"" << svg::num(H - B) << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double fx = xr.lo + xr.span() * k / 5.0;
    const double fy = yr.lo + yr.span() * k / 5.0;
    svg::write_text(os, px(fx), H - B + 18, svg::num(fx), 10);
    svg::write_text(os, L - 8, py(fy) + 4, svg::num(fy), 10, "end");
    os << "<line x1=\"" << svg::num(px(fx)) << "\" y1=\"" << svg::num(H - B) << "\" x2=\""
       << svg::num(px(fx)) << "\" y2=\"" << svg::num(H - B + 5) << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << svg::num(L - 5) << "\" y1=\"" << svg::num(py(fy)) << "\" x2=\""
       << svg::num(L) << "\" y2=\"" << svg::num(py(fy)) << "\" stroke=\"black\"/>\n";
  }
  // bands first so lines draw on top
  for (const auto& s : series) {
    if (s.band_lo.empty() || s.x.empty()) continue;
    os << "<polygon fill=\"" << s.color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i)
      os << svg::num(px(s.x[i])) << "," << svg::num(py(s.band_hi[i])) << " ";
    for (size_t i = s.x.size(); i-- > 0;)
      os << svg::num(px(s.x[i])) << "," << svg::num(py(s.band_lo[i])) << " ";
    os << "\"/>\n";
  }
  for (const auto& s : series) {
    if (s.x.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i)
      os << svg::num(px(s.x[i])) << "," << svg::num(py(s.y[i])) << " ";
    os << "\"/>\n";
  }
  // legend
  double ly = T + 10;
  for (const auto& s : series) {
    os << "<line x1=\"" << svg::num(W - R + 10) << "\" y1=\"" << svg::num(ly) << "\" x2=\""
       << svg::num(W - R + 34) << "\" y2=\"" << svg::num(ly) << "\" stroke=\"" << s.color
       << "\" stroke-width=\"2\"/>\n";
    svg::write_text(os, W - R + 40, ly + 4, s.label, 11, "start");
    ly += 18;
  }
  os << "</svg>\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open for writing: " + path);
  f << os.str();
}

inline void write_bar_chart(const std::string& path, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel,
                            const std::vector<std::string>& categories,
                            const std::vector<svg::BarSeries>& series) {
  if (series.empty() || categories.empty()) throw UsageError("bar chart: no input data");
  const int W = 900, H = 540;
  const double L = 70, R = 180, T = 50, B = 60;
  svg::Range yr;
  yr.lo = 0.0;
  yr.hi = 0.0;
  for (const auto& s : series) {
    if (s.values.size() != categories.size()) throw ShapeError("bar chart: category count mismatch");
    for (size_t i = 0; i < s.values.size(); ++i) {
      const double e = s.errors.empty() ? 0.0 : s.errors[i];
      yr.include(s.values[i] + e);
      yr.include(s.values[i] - e);
    }
  }
  auto py = [&](double y) { return H - B - (y - yr.lo) / yr.span() * (H - T - B); };
  const double plot_w = W - L - R;
  const double group_w = plot_w / static_cast<double>(categories.size());
  const double bar_w = group_w * 0.8 / static_cast<double>(series.size());

  std::ostringstream os;
  svg::write_header(os, W, H);
  svg::write_text(os, (L + W - R) / 2.0, 25, title, 16);
  svg::write_text(os, (L + W - R) / 2.0, H - 15, xlabel, 12);
  os << "<g transform=\"rotate(-90 20 " << svg::num((T + H - B) / 2.0) << ")\">\n";
  svg::write_text(os, 20, (T + H - B) / 2.0, ylabel, 12);
  os << "</g>\n";
  os << "<line x1=\"" << svg::num(L) << "\" y1=\"" << svg::num(H - B) << "\" x2=\""
     << svg::num(W - R) << "\" y2=\"" << svg::num(H - B) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << svg::num(L) << "\" y1=\"" << svg::num(T) << "\" x2=\"" << svg::num(L)
     << "\" y2=\"" << svg::num(H - B) << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double fy = yr.lo + yr.span() * k / 5.0;
    svg::write_text(os, L - 8, py(fy) + 4, svg::num(fy), 10, "end");
  }
  const double zero_y = py(std::max(0.0, yr.lo));
  for (size_t ci = 0; ci < categories.size(); ++ci) {
    svg::write_text(os, L + group_w * (ci + 0.5), H - B + 18, categories[ci], 10);
    for (size_t si = 0; si < series.size(); ++si) {
      const double v = series[si].values[ci];
      const double x = L + group_w * ci + group_w * 0.1 + bar_w * static_cast<double>(si);
      const double ytop = py(std::max(v, 0.0));
      const double ybot = v >= 0.0 ? zero_y : py(v);
      os << "<rect x=\"" << svg::num(x) << "\" y=\"" << svg::num(ytop) << "\" width=\""
         << svg::num(bar_w) << "\" height=\"" << svg::num(std::max(0.0, ybot - ytop))
         << "\" fill=\"" << series[si].color << "\"/>\n";
      if (!series[si].errors.empty()) {
        const double e = series[si].errors[ci];
        const double cx = x + bar_w / 2.0;
        os << "<line x1=\"" << svg::num(cx) << "\" y1=\"" << svg::num(py(v - e)) << "\" x2=\""
           << svg::num(cx) << "\" y2=\"" << svg::num(py(v + e))
           << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
      }
    }
  }
  double ly = T + 10;
  for (const auto& s : series) {
    os << "<rect x=\"" << svg::num(W - R + 10) << "\" y=\"" << svg::num(ly - 8)
       << "\" width=\"12\" height=\"12\" fill=\"" << s.color << "\"/>\n";
    svg::write_text(os, W - R + 28, ly + 2, s.label, 11, "start");
    ly += 18;
  }
  os << "</svg>\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open for writing: " + path);
  f << os.str();
}

}  // namespace fgsfrql
