#include "utrad/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace utrad::cli::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
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

// Linear-interpolation quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted[0];
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Small deterministic horizontal offset so coincident points stay visible.
double jitter(std::size_t i) { return (static_cast<double>((i * 37) % 11) - 5.0) * 1.5; }

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void header(std::ostringstream& o, const std::string& title) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
    << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"15\">" << xml_escape(title) << "</text>\n";
}

void y_axis(std::ostringstream& o, const Frame& f, const std::string& label) {
  o << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(f.py(f.y0)) << "\" x2=\"" << num(kLeft)
    << "\" y2=\"" << num(f.py(f.y1)) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = f.y0 + (f.y1 - f.y0) * i / 5.0;
    o << "<line x1=\"" << num(kLeft - 4) << "\" y1=\"" << num(f.py(v)) << "\" x2=\"" << num(kLeft)
      << "\" y2=\"" << num(f.py(v)) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(f.py(v) + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick(v) << "</text>\n";
  }
  if (!label.empty()) {
    o << "<text x=\"14\" y=\"" << num((kTop + kHeight - kBottom) / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 "
      << num((kTop + kHeight - kBottom) / 2) << ")\">" << xml_escape(label) << "</text>\n";
  }
}

void x_axis_line(std::ostringstream& o, const Frame& f) {
  o << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(f.py(f.y0)) << "\" x2=\""
    << num(kWidth - kRight) << "\" y2=\"" << num(f.py(f.y0)) << "\" stroke=\"black\"/>\n";
}

void category_labels(std::ostringstream& o, const Frame& f, const std::vector<Series>& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    o << "<text x=\"" << num(f.px(static_cast<double>(i))) << "\" y=\"" << num(kHeight - kBottom + 18)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(s[i].label)
      << "</text>\n";
  }
}

}  // namespace

std::string boxplot(const std::string& title, const std::vector<Series>& series) {
  std::ostringstream o;
  header(o, title);
  const Frame f{-0.5, static_cast<double>(series.size()) - 0.5, 0.0, 1.0};
  y_axis(o, f, "DSC");
  x_axis_line(o, f);
  category_labels(o, f, series);
  const double half = std::min(40.0, 0.3 * (kWidth - kLeft - kRight) / std::max<std::size_t>(1, series.size()));
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].values.empty()) continue;
    auto v = series[i].values;
    std::sort(v.begin(), v.end());
    const double cx = f.px(static_cast<double>(i));
    const double q1 = quantile(v, 0.25), q2 = quantile(v, 0.5), q3 = quantile(v, 0.75);
    o << "<line x1=\"" << num(cx) << "\" y1=\"" << num(f.py(v.front())) << "\" x2=\"" << num(cx)
      << "\" y2=\"" << num(f.py(v.back())) << "\" stroke=\"black\"/>\n";
    o << "<rect x=\"" << num(cx - half) << "\" y=\"" << num(f.py(q3)) << "\" width=\"" << num(2 * half)
      << "\" height=\"" << num(f.py(q1) - f.py(q3)) << "\" fill=\"#c6dbef\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << num(cx - half) << "\" y1=\"" << num(f.py(q2)) << "\" x2=\"" << num(cx + half)
      << "\" y2=\"" << num(f.py(q2)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    for (std::size_t j = 0; j < series[i].values.size(); ++j) {
      o << "<circle cx=\"" << num(cx + jitter(j)) << "\" cy=\"" << num(f.py(series[i].values[j]))
        << "\" r=\"2.5\" fill=\"#08519c\" fill-opacity=\"0.6\"/>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

std::string curve(const CurvePlot& plot) {
  double xmax = 0.0, ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  auto extend = [&](const std::vector<std::pair<double, double>>& pts) {
    for (const auto& [x, y] : pts) {
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  };
  extend(plot.points);
  extend(plot.curve);
  if (plot.marker_x > xmax) xmax = plot.marker_x;
  if (!(ymin < ymax)) {
    ymin = std::isfinite(ymin) ? ymin - 0.05 : 0.0;
    ymax = std::isfinite(ymax) ? ymax + 0.05 : 1.0;
  }
  const double pad = 0.05 * (ymax - ymin);
  const double y0 = std::max(0.0, ymin - pad);
  double y1 = std::min(1.0, ymax + pad);
  if (!(y1 > y0)) y1 = ymax + pad;
  const Frame f{0.0, xmax > 0.0 ? xmax * 1.05 : 1.0, y0, y1};
  std::ostringstream o;
  header(o, plot.title);
  y_axis(o, f, plot.y_label);
  x_axis_line(o, f);
  for (int i = 0; i <= 5; ++i) {
    const double v = f.x0 + (f.x1 - f.x0) * i / 5.0;
    o << "<text x=\"" << num(f.px(v)) << "\" y=\"" << num(kHeight - kBottom + 18)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << tick(v) << "</text>\n";
  }
  o << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"" << num(kHeight - 16)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(plot.x_label)
    << "</text>\n";
  if (!plot.curve.empty()) {
    o << "<polyline fill=\"none\" stroke=\"#d94801\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < plot.curve.size(); ++i) {
      if (i) o << ' ';
      o << num(f.px(plot.curve[i].first)) << ',' << num(f.py(plot.curve[i].second));
    }
    o << "\"/>\n";
  }
  for (const auto& [x, y] : plot.points) {
    o << "<circle cx=\"" << num(f.px(x)) << "\" cy=\"" << num(f.py(y)) << "\" r=\"4\" fill=\"#08519c\"/>\n";
  }
  if (plot.marker_x >= 0.0) {
    o << "<line x1=\"" << num(f.px(plot.marker_x)) << "\" y1=\"" << num(f.py(f.y0)) << "\" x2=\""
      << num(f.px(plot.marker_x)) << "\" y2=\"" << num(f.py(f.y1))
      << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    o << "<text x=\"" << num(f.px(plot.marker_x) + 4) << "\" y=\"" << num(kTop + 12)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(plot.marker_label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string strip(const std::string& title, const std::vector<Series>& groups, double threshold,
                  bool show_threshold) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& g : groups) {
    for (double v : g.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (show_threshold) {
    lo = std::min(lo, threshold);
    hi = std::max(hi, threshold);
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (!(lo < hi)) lo -= 0.5, hi += 0.5;
  const double pad = 0.05 * (hi - lo);
  const Frame f{-0.5, static_cast<double>(groups.size()) - 0.5, lo - pad, hi + pad};
  std::ostringstream o;
  header(o, title);
  y_axis(o, f, "");
  x_axis_line(o, f);
  category_labels(o, f, groups);
  const char* colors[] = {"#08519c", "#a50f15", "#006d2c", "#54278f"};
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const double cx = f.px(static_cast<double>(i));
    for (std::size_t j = 0; j < groups[i].values.size(); ++j) {
      o << "<circle cx=\"" << num(cx + 3 * jitter(j)) << "\" cy=\"" << num(f.py(groups[i].values[j]))
        << "\" r=\"3\" fill=\"" << colors[i % 4] << "\" fill-opacity=\"0.7\"/>\n";
    }
  }
  if (show_threshold) {
    o << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(f.py(threshold)) << "\" x2=\""
      << num(kWidth - kRight) << "\" y2=\"" << num(f.py(threshold))
      << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace utrad::cli::svg
