#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cliplab::pipeline::svg {

namespace {

constexpr double kWidth = 480.0;
constexpr double kHeight = 420.0;
constexpr double kMargin = 56.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string escape(const std::string& s) {
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

struct View {
  double xmin, xmax, ymin, ymax;
  double px(double x) const { return kMargin + (x - xmin) / (xmax - xmin) * (kWidth - 2 * kMargin); }
  double py(double y) const { return kHeight - kMargin - (y - ymin) / (ymax - ymin) * (kHeight - 2 * kMargin); }
};

void open(std::ostringstream& o, const std::string& title) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
    << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\" font-family=\"sans-serif\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
    << "</text>\n";
}

void labels(std::ostringstream& o, const std::string& x_label, const std::string& y_label) {
  o << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(kHeight - 14) << "\" text-anchor=\"middle\" font-size=\"12\">"
    << escape(x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << num(kHeight / 2) << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
    << num(kHeight / 2) << ")\">" << escape(y_label) << "</text>\n";
}

void legend(std::ostringstream& o, const std::vector<std::pair<std::string, std::string>>& items) {
  double y = 44.0;
  for (const auto& [color, text] : items) {
    o << "<circle cx=\"" << num(kWidth - kMargin - 90) << "\" cy=\"" << num(y) << "\" r=\"4\" fill=\"" << color
      << "\"/>\n";
    o << "<text x=\"" << num(kWidth - kMargin - 80) << "\" y=\"" << num(y + 4) << "\" font-size=\"11\">" << escape(text)
      << "</text>\n";
    y += 16.0;
  }
}

}  // namespace

std::string scatter(const Scatter& plot) {
  View v{-1.1, 1.1, -1.1, 1.1};
  if (!plot.unit_circle) {
    double lo_x = 0.0, hi_x = 0.0, lo_y = 0.0, hi_y = 0.0;
    for (const auto& m : plot.markers) {
      lo_x = std::min(lo_x, m.x), hi_x = std::max(hi_x, m.x);
      lo_y = std::min(lo_y, m.y), hi_y = std::max(hi_y, m.y);
    }
    for (const auto& a : plot.arrows) {
      lo_x = std::min(lo_x, a.x), hi_x = std::max(hi_x, a.x);
      lo_y = std::min(lo_y, a.y), hi_y = std::max(hi_y, a.y);
    }
    const double pad_x = std::max(1e-9, 0.05 * (hi_x - lo_x));
    const double pad_y = std::max(1e-9, 0.05 * (hi_y - lo_y));
    v = {lo_x - pad_x, hi_x + pad_x, lo_y - pad_y, hi_y + pad_y};
  }

  std::ostringstream o;
  open(o, plot.title);
  o << "<line x1=\"" << num(v.px(v.xmin)) << "\" y1=\"" << num(v.py(0)) << "\" x2=\"" << num(v.px(v.xmax)) << "\" y2=\""
    << num(v.py(0)) << "\" stroke=\"#999\" stroke-width=\"0.8\"/>\n";
  o << "<line x1=\"" << num(v.px(0)) << "\" y1=\"" << num(v.py(v.ymin)) << "\" x2=\"" << num(v.px(0)) << "\" y2=\""
    << num(v.py(v.ymax)) << "\" stroke=\"#999\" stroke-width=\"0.8\"/>\n";
  if (plot.unit_circle) {
    o << "<ellipse cx=\"" << num(v.px(0)) << "\" cy=\"" << num(v.py(0)) << "\" rx=\"" << num(v.px(1) - v.px(0))
      << "\" ry=\"" << num(v.py(0) - v.py(1)) << "\" fill=\"none\" stroke=\"#666\"/>\n";
  }
  for (const auto& m : plot.markers) {
    o << "<circle cx=\"" << num(v.px(m.x)) << "\" cy=\"" << num(v.py(m.y)) << "\" r=\"" << num(m.radius)
      << "\" fill=\"" << m.color << "\" fill-opacity=\"0.8\"/>\n";
    if (!m.label.empty()) {
      o << "<text x=\"" << num(v.px(m.x) + 5) << "\" y=\"" << num(v.py(m.y) - 5) << "\" font-size=\"11\">"
        << escape(m.label) << "</text>\n";
    }
  }
  for (const auto& a : plot.arrows) {
    o << "<line x1=\"" << num(v.px(0)) << "\" y1=\"" << num(v.py(0)) << "\" x2=\"" << num(v.px(a.x)) << "\" y2=\""
      << num(v.py(a.y)) << "\" stroke=\"" << a.color << "\" stroke-width=\"2\"/>\n";
    if (!a.label.empty()) {
      o << "<text x=\"" << num(v.px(a.x) + 5) << "\" y=\"" << num(v.py(a.y) - 5) << "\" font-size=\"11\" fill=\""
        << a.color << "\">" << escape(a.label) << "</text>\n";
    }
  }
  labels(o, plot.x_label, plot.y_label);
  legend(o, plot.legend);
  o << "</svg>\n";
  return o.str();
}

std::string bars(const std::string& title, const std::string& y_label, const std::vector<Bar>& data) {
  double lo = 0.0, hi = 0.0;
  for (const auto& b : data) {
    if (std::isfinite(b.value)) lo = std::min(lo, b.value), hi = std::max(hi, b.value);
  }
  if (hi - lo <= 0.0) hi = lo + 1.0;
  const View v{0.0, static_cast<double>(std::max<std::size_t>(data.size(), 1)), lo, hi + 0.05 * (hi - lo)};

  std::ostringstream o;
  open(o, title);
  o << "<line x1=\"" << num(v.px(v.xmin)) << "\" y1=\"" << num(v.py(0)) << "\" x2=\"" << num(v.px(v.xmax)) << "\" y2=\""
    << num(v.py(0)) << "\" stroke=\"#333\"/>\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double value = std::isfinite(data[i].value) ? data[i].value : 0.0;
    const double x0 = v.px(static_cast<double>(i) + 0.15);
    const double x1 = v.px(static_cast<double>(i) + 0.85);
    const double y0 = v.py(std::max(0.0, value));
    const double y1 = v.py(std::min(0.0, value));
    o << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(x1 - x0) << "\" height=\""
      << num(y1 - y0) << "\" fill=\"" << data[i].color << "\"/>\n";
    o << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kHeight - kMargin + 14)
      << "\" text-anchor=\"middle\" font-size=\"10\">" << escape(data[i].label) << "</text>\n";
    o << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(y0 - 4) << "\" text-anchor=\"middle\" font-size=\"10\">"
      << num(data[i].value) << "</text>\n";
  }
  labels(o, "", y_label);
  o << "</svg>\n";
  return o.str();
}

std::string histogram(const std::string& title, const std::string& x_label, const std::vector<double>& values,
                      std::size_t bins, const std::string& color) {
  bins = std::max<std::size_t>(bins, 1);
  std::vector<double> finite;
  for (double x : values) {
    if (std::isfinite(x)) finite.push_back(x);
  }
  double lo = 0.0, hi = 1.0;
  if (!finite.empty()) {
    lo = *std::min_element(finite.begin(), finite.end());
    hi = *std::max_element(finite.begin(), finite.end());
    if (hi - lo <= 0.0) hi = lo + 1.0;
  }
  std::vector<double> counts(bins, 0.0);
  for (double x : finite) {
    auto b = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(bins));
    counts[std::min(b, bins - 1)] += 1.0;
  }
  std::vector<Bar> data;
  for (std::size_t b = 0; b < bins; ++b) {
    data.push_back({num(lo + (hi - lo) * (static_cast<double>(b) + 0.5) / static_cast<double>(bins)), counts[b], color});
  }
  std::string svg = bars(title, "count", data);
  const std::string tail = "</svg>\n";
  std::ostringstream extra;
  extra << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(kHeight - 14)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(x_label) << "</text>\n";
  svg.insert(svg.size() - tail.size(), extra.str());
  return svg;
}

}  // namespace cliplab::pipeline::svg
