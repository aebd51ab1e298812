#include "shbreg/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace shbreg {

namespace {

constexpr double kWidth = 720, kHeight = 460;
constexpr double kLeft = 70, kRight = 180, kTop = 40, kBottom = 50;
constexpr std::array<const char*, 8> kColors = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e",
                                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_svg_plot(std::ostream& os, const std::string& title,
                    const std::vector<PlotSeries>& series) {
  double x_max = 1.0;
  double y_lo = std::numeric_limits<double>::infinity();
  double y_hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.iters.size(); ++k) {
      x_max = std::max(x_max, static_cast<double>(s.iters[k]));
      if (s.values[k] > 0.0) {
        y_lo = std::min(y_lo, std::log10(s.values[k]));
        y_hi = std::max(y_hi, std::log10(s.values[k]));
      }
    }
  }
  if (!std::isfinite(y_lo)) {
    y_lo = -1.0;
    y_hi = 0.0;
  }
  y_lo = std::floor(y_lo);
  y_hi = std::max(std::ceil(y_hi), y_lo + 1.0);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + pw * x / x_max; };
  auto py = [&](double ly) { return kTop + ph * (y_hi - ly) / (y_hi - y_lo); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kLeft) << "\" y=\"24\" font-size=\"14\">" << escape(title)
     << "</text>\n";
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = y_lo; d <= y_hi + 0.5; d += 1.0) {
    os << "<line x1=\"" << num(kLeft) << "\" x2=\"" << num(kLeft + pw) << "\" y1=\"" << num(py(d))
       << "\" y2=\"" << num(py(d)) << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(d) + 4)
       << "\" text-anchor=\"end\">1e" << static_cast<int>(d) << "</text>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double x = x_max * t / 4.0;
    os << "<text x=\"" << num(px(x)) << "\" y=\"" << num(kTop + ph + 18)
       << "\" text-anchor=\"middle\">" << static_cast<long long>(std::llround(x)) << "</text>\n";
  }
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 10)
     << "\" text-anchor=\"middle\">iteration</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % kColors.size()];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < series[s].iters.size(); ++k) {
      if (!(series[s].values[k] > 0.0)) continue;
      os << num(px(static_cast<double>(series[s].iters[k]))) << ','
         << num(py(std::log10(series[s].values[k]))) << ' ';
    }
    os << "\"/>\n";
    const double ly = kTop + 16.0 + 18.0 * static_cast<double>(s);
    os << "<line x1=\"" << num(kWidth - kRight + 12) << "\" x2=\"" << num(kWidth - kRight + 36)
       << "\" y1=\"" << num(ly) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(kWidth - kRight + 42) << "\" y=\"" << num(ly + 4) << "\">"
       << escape(series[s].label) << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace shbreg
