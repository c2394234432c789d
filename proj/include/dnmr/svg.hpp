#ifndef DNMR_SVG_HPP
#define DNMR_SVG_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "dnmr/error.hpp"

namespace dnmr {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotStyle {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 720;
  int height = 480;
};

namespace detail {

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::string escape_xml(const std::string& s) {
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

inline constexpr std::array<const char*, 8> palette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                       "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

}  // namespace detail

/// Line plot of the finite points of each series. Points on a log axis must be positive.
inline std::string render_svg(const std::vector<Series>& series, const PlotStyle& style) {
  require(!series.empty(), "plot has at least one series");
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  std::size_t plotted = 0;
  for (const auto& s : series) {
    require(s.x.size() == s.y.size(), "series x and y lengths match");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if ((style.log_x && s.x[i] <= 0.0) || (style.log_y && s.y[i] <= 0.0))
        throw ValidationError("series '" + s.label + "' has non-positive values on a log axis");
      const double x = style.log_x ? std::log10(s.x[i]) : s.x[i];
      const double y = style.log_y ? std::log10(s.y[i]) : s.y[i];
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
      ++plotted;
    }
  }
  require(plotted > 0, "plot has at least one finite point");
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;

  const double left = 80, right = 160, top = 40, bottom = 60;
  const double pw = style.width - left - right, ph = style.height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) + "\" height=\"" +
       std::to_string(style.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + detail::fixed3(left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
       detail::escape_xml(style.title) + "</text>\n";
  o += "<rect x=\"" + detail::fixed3(left) + "\" y=\"" + detail::fixed3(top) + "\" width=\"" + detail::fixed3(pw) +
       "\" height=\"" + detail::fixed3(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    const double vx = style.log_x ? std::pow(10.0, fx) : fx, vy = style.log_y ? std::pow(10.0, fy) : fy;
    o += "<text x=\"" + detail::fixed3(px(fx)) + "\" y=\"" + detail::fixed3(top + ph + 18) +
         "\" text-anchor=\"middle\">" + detail::tick_label(vx) + "</text>\n";
    o += "<text x=\"" + detail::fixed3(left - 6) + "\" y=\"" + detail::fixed3(py(fy) + 4) +
         "\" text-anchor=\"end\">" + detail::tick_label(vy) + "</text>\n";
  }
  o += "<text x=\"" + detail::fixed3(left + pw / 2) + "\" y=\"" + detail::fixed3(style.height - 16.0) +
       "\" text-anchor=\"middle\">" + detail::escape_xml(style.x_label) + "</text>\n";
  o += "<text x=\"16\" y=\"" + detail::fixed3(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       detail::fixed3(top + ph / 2) + ")\">" + detail::escape_xml(style.y_label) + "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = detail::palette[k % detail::palette.size()];
    std::string points;
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double x = px(style.log_x ? std::log10(s.x[i]) : s.x[i]);
      const double y = py(style.log_y ? std::log10(s.y[i]) : s.y[i]);
      points += (n++ ? " " : "") + detail::fixed3(x) + "," + detail::fixed3(y);
      if (s.x.size() == 1)
        o += "<circle cx=\"" + detail::fixed3(x) + "\" cy=\"" + detail::fixed3(y) + "\" r=\"3\" fill=\"" + colour +
             "\"/>\n";
    }
    if (n > 1)
      o += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"" + points +
           "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(k + 1);
    o += "<line x1=\"" + detail::fixed3(left + pw + 10) + "\" y1=\"" + detail::fixed3(ly - 4) + "\" x2=\"" +
         detail::fixed3(left + pw + 30) + "\" y2=\"" + detail::fixed3(ly - 4) + "\" stroke=\"" + colour +
         "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + detail::fixed3(left + pw + 34) + "\" y=\"" + detail::fixed3(ly) + "\">" +
         detail::escape_xml(s.label) + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

}  // namespace dnmr

#endif
