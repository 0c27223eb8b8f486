#pragma once

#include <string>
#include <vector>

namespace bevdg::svg {

struct Series {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

// Minimal deterministic line plot: axes, ticks, legend, one polyline per
// series. No plotting dependency; output is plain SVG 1.1.
void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series);

struct BarGroup {
  std::string name;                     // e.g. a domain tag
  std::vector<double> values;           // one bar per category
};

// Grouped bar chart (values in [0, 1] rendered as percentages).
void write_bar_chart(const std::string& path, const std::string& title,
                     const std::vector<std::string>& categories,
                     const std::vector<BarGroup>& groups);

}  // namespace bevdg::svg
