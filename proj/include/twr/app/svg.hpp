#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace twr::app {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool markers = false;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  bool log_y = false;
  int width = 640;
  int height = 400;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
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

// Roughly five round tick values covering [lo, hi].
inline std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(t);
  return out;
}

}  // namespace detail

// Renders a static line chart. Non-finite points are skipped.
inline std::string render_svg(const Chart& c) {
  const double ml = 70, mr = 20, mt = 36, mb = 50;
  const double pw = c.width - ml - mr, ph = c.height - mt - mb;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  const auto ty = [&](double v) { return c.log_y ? std::log10(v) : v; };
  for (const auto& s : c.series) {
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]) || (c.log_y && !(s.y[k] > 0))) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, ty(s.y[k]));
      y1 = std::max(y1, ty(s.y[k]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const auto px = [&](double v) { return ml + (v - x0) / (x1 - x0) * pw; };
  const auto py = [&](double v) { return mt + ph - (v - y0) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << c.width << "\" height=\"" << c.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << c.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << detail::escape(c.title)
    << "</text>\n";
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (double t : detail::ticks(x0, x1)) {
    o << "<line x1=\"" << detail::num(px(t)) << "\" y1=\"" << mt + ph << "\" x2=\"" << detail::num(px(t)) << "\" y2=\""
      << mt + ph + 4 << "\" stroke=\"#444\"/>";
    o << "<text x=\"" << detail::num(px(t)) << "\" y=\"" << mt + ph + 18 << "\" text-anchor=\"middle\">"
      << detail::num(t) << "</text>\n";
  }
  for (double t : detail::ticks(y0, y1)) {
    o << "<line x1=\"" << ml - 4 << "\" y1=\"" << detail::num(py(t)) << "\" x2=\"" << ml + pw << "\" y2=\""
      << detail::num(py(t)) << "\" stroke=\"#ddd\"/>";
    o << "<text x=\"" << ml - 8 << "\" y=\"" << detail::num(py(t) + 4) << "\" text-anchor=\"end\">"
      << detail::num(c.log_y ? std::pow(10.0, t) : t) << "</text>\n";
  }
  o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << c.height - 10 << "\" text-anchor=\"middle\">"
    << detail::escape(c.x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << mt + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << detail::escape(c.y_label) << "</text>\n";

  int legend_row = 0;
  for (const auto& s : c.series) {
    std::string pts;
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]) || (c.log_y && !(s.y[k] > 0))) continue;
      pts += detail::num(px(s.x[k])) + "," + detail::num(py(ty(s.y[k]))) + " ";
      if (s.markers) {
        o << "<circle cx=\"" << detail::num(px(s.x[k])) << "\" cy=\"" << detail::num(py(ty(s.y[k])))
          << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      }
    }
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
    const double ly = mt + 14 + 16 * legend_row++;
    o << "<line x1=\"" << ml + pw - 150 << "\" y1=\"" << ly - 4 << "\" x2=\"" << ml + pw - 130 << "\" y2=\"" << ly - 4
      << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>";
    o << "<text x=\"" << ml + pw - 125 << "\" y=\"" << ly << "\">" << detail::escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace twr::app
