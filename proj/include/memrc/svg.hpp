#ifndef MEMRC_SVG_HPP
#define MEMRC_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "memrc/errors.hpp"

namespace memrc {
namespace svg {

// Small static-SVG plotter for the experiment reports: line charts, grouped
// bars and a weight heatmap. Output is deterministic text.

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

namespace detail {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 72, kRight = 24, kTop = 40, kBottom = 56;

inline const char* series_color(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return colors[i % 8];
}

struct Frame {
  double x_lo, x_hi, y_lo, y_hi;
  double px(double x) const {
    return kLeft + (x - x_lo) / (x_hi - x_lo) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (y - y_lo) / (y_hi - y_lo) * (kHeight - kTop - kBottom);
  }
};

inline void open_svg(std::ofstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
}

inline void axes(std::ofstream& out, const Frame& f, const std::string& xlabel,
                 const std::string& ylabel) {
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
      << "\" height=\"" << kHeight - kTop - kBottom
      << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = f.x_lo + (f.x_hi - f.x_lo) * i / 5.0;
    const double yv = f.y_lo + (f.y_hi - f.y_lo) * i / 5.0;
    out << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << kHeight - kBottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(xv)
        << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(f.py(yv) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(yv)
        << "</text>\n";
    out << "<line x1=\"" << num(f.px(xv)) << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
        << num(f.px(xv)) << "\" y2=\"" << kHeight - kBottom + 4
        << "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    out << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << num(f.py(yv)) << "\" x2=\"" << kLeft
        << "\" y2=\"" << num(f.py(yv)) << "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  }
  out << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xlabel
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << (kTop + kHeight - kBottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 18 " << (kTop + kHeight - kBottom) / 2 << ")\">" << ylabel
      << "</text>\n";
}

}  // namespace detail

struct Series {
  std::string name;
  std::vector<double> y;
};

inline void line_chart(const std::string& path, const std::string& title,
                       const std::string& xlabel, const std::string& ylabel,
                       const std::vector<double>& x, const std::vector<Series>& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  detail::open_svg(out, title);
  if (!x.empty()) {
    double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
    for (const auto& s : series)
      for (double v : s.y) {
        y_lo = std::min(y_lo, v);
        y_hi = std::max(y_hi, v);
      }
    if (!(y_hi > y_lo)) {
      y_hi = y_lo + 1.0;
      y_lo -= 1.0;
    }
    const double pad = 0.05 * (y_hi - y_lo);
    detail::Frame f{x.front(), x.back() > x.front() ? x.back() : x.front() + 1.0, y_lo - pad,
                    y_hi + pad};
    detail::axes(out, f, xlabel, ylabel);
    for (std::size_t s = 0; s < series.size(); ++s) {
      out << "<polyline fill=\"none\" stroke=\"" << detail::series_color(s)
          << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < x.size() && i < series[s].y.size(); ++i)
        out << num(f.px(x[i])) << "," << num(f.py(series[s].y[i])) << " ";
      out << "\"/>\n";
      out << "<text x=\"" << detail::kWidth - detail::kRight - 6 << "\" y=\""
          << detail::kTop + 16 + 16 * static_cast<double>(s)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
          << detail::series_color(s) << "\">" << series[s].name << "</text>\n";
    }
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failed: " + path);
}

// Grouped bars over integer categories (e.g. error counts 0..9).
inline void bar_chart(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<std::string>& categories,
                      const std::vector<Series>& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  detail::open_svg(out, title);
  const auto n_cat = categories.size();
  const auto n_ser = std::max<std::size_t>(1, series.size());
  double y_hi = 0.0;
  for (const auto& s : series)
    for (double v : s.y) y_hi = std::max(y_hi, v);
  if (y_hi <= 0.0) y_hi = 1.0;
  detail::Frame f{0.0, static_cast<double>(n_cat), 0.0, y_hi * 1.05};
  detail::axes(out, f, xlabel, ylabel);
  const double slot = (detail::kWidth - detail::kLeft - detail::kRight) / std::max<std::size_t>(1, n_cat);
  const double bar = slot * 0.8 / static_cast<double>(n_ser);
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (std::size_t c = 0; c < n_cat && c < series[s].y.size(); ++c) {
      const double x0 = detail::kLeft + slot * static_cast<double>(c) + slot * 0.1 +
                        bar * static_cast<double>(s);
      const double top = f.py(series[s].y[c]);
      out << "<rect x=\"" << num(x0) << "\" y=\"" << num(top) << "\" width=\"" << num(bar)
          << "\" height=\"" << num(detail::kHeight - detail::kBottom - top) << "\" fill=\""
          << detail::series_color(s) << "\" fill-opacity=\"0.85\"/>\n";
    }
    out << "<text x=\"" << detail::kWidth - detail::kRight - 6 << "\" y=\""
        << detail::kTop + 16 + 16 * static_cast<double>(s)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
        << detail::series_color(s) << "\">" << series[s].name << "</text>\n";
  }
  for (std::size_t c = 0; c < n_cat; ++c) {
    out << "<text x=\"" << num(detail::kLeft + slot * (static_cast<double>(c) + 0.5)) << "\" y=\""
        << detail::kHeight - detail::kBottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << categories[c]
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failed: " + path);
}

// Heatmap of a row-major matrix; diverging blue-white-red scale centered at 0.
inline void heatmap(const std::string& path, const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  detail::open_svg(out, title);
  const auto n_rows = rows.size();
  const auto n_cols = n_rows ? rows.front().size() : 0;
  double peak = 0.0;
  for (const auto& row : rows)
    for (double v : row) peak = std::max(peak, std::abs(v));
  if (peak <= 0.0) peak = 1.0;
  const double cell_w = (detail::kWidth - detail::kLeft - detail::kRight) / std::max<std::size_t>(1, n_cols);
  const double cell_h = (detail::kHeight - detail::kTop - detail::kBottom) / std::max<std::size_t>(1, n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t j = 0; j < n_cols; ++j) {
      const double f = std::clamp(rows[i][j] / peak, -1.0, 1.0);
      const int red = f > 0 ? 255 : static_cast<int>(255 * (1.0 + f));
      const int blue = f < 0 ? 255 : static_cast<int>(255 * (1.0 - f));
      const int green = static_cast<int>(255 * (1.0 - std::abs(f)));
      out << "<rect x=\"" << num(detail::kLeft + cell_w * static_cast<double>(j)) << "\" y=\""
          << num(detail::kTop + cell_h * static_cast<double>(i)) << "\" width=\"" << num(cell_w + 0.5)
          << "\" height=\"" << num(cell_h + 0.5) << "\" fill=\"rgb(" << red << "," << green << ","
          << blue << ")\"/>\n";
    }
  }
  out << "<rect x=\"" << detail::kLeft << "\" y=\"" << detail::kTop << "\" width=\""
      << detail::kWidth - detail::kLeft - detail::kRight << "\" height=\""
      << detail::kHeight - detail::kTop - detail::kBottom
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
  out << "<text x=\"" << (detail::kLeft + detail::kWidth - detail::kRight) / 2 << "\" y=\""
      << detail::kHeight - 16 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\">" << xlabel << "</text>\n";
  out << "<text x=\"18\" y=\"" << (detail::kTop + detail::kHeight - detail::kBottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 18 " << (detail::kTop + detail::kHeight - detail::kBottom) / 2
      << ")\">" << ylabel << "</text>\n";
  out << "</svg>\n";
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace svg
}  // namespace memrc

#endif  // MEMRC_SVG_HPP
