#pragma once

#include <string>
#include <vector>

namespace act {

struct ChartSeries {
  std::string name;
  std::vector<double> values;  // aligned with the chart's x labels
};

// Plain SVG line chart: one polyline per series, first/middle/last x labels,
// five y ticks, and a legend. Output depends only on the inputs.
std::string render_line_chart_svg(const std::string& title, const std::string& y_label,
                                  const std::vector<std::string>& x_labels, const std::vector<ChartSeries>& series);

}  // namespace act
