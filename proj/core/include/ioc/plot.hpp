#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ioc {

struct Series {
  std::string label;
  std::vector<double> values;
  std::string color = "#1f77b4";
};

/// Trailing moving average; the first window-1 points average what exists.
std::vector<double> moving_average(const std::vector<double>& values, int window);

/// Self-contained SVG line chart. Each series is drawn raw (faint) with its
/// moving average on top when smoothing_window > 1.
void write_line_chart_svg(std::ostream& out, const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<Series>& series, int smoothing_window = 10);

/// Row-major heatmap over [0, 1]; NaN cells are drawn as walls.
void write_heatmap_svg(std::ostream& out, const std::string& title, int rows, int cols,
                       const std::vector<double>& values);

}  // namespace ioc
