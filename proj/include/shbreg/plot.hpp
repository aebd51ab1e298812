#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace shbreg {

struct PlotSeries {
  std::string label;
  std::vector<std::size_t> iters;
  std::vector<double> values;
};

/// Minimal SVG line chart: linear iteration axis, log10 error axis, one
/// polyline per series and a legend. Non-positive values are skipped.
void write_svg_plot(std::ostream& os, const std::string& title,
                    const std::vector<PlotSeries>& series);

}  // namespace shbreg
