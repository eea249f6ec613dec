#pragma once

#include <string>
#include <utility>
#include <vector>

namespace npglab::cli {

struct ChartSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y), y on the raw scale
};

/**
 * Self-contained SVG line chart: linear x axis, log10 y axis. y values are
 * floored at y_floor before taking logs so exact zeros stay plottable; the
 * emitted text has no external references.
 */
std::string render_log_line_chart(const std::string& title, const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<ChartSeries>& series,
                                  double y_floor = 1e-16);

}  // namespace npglab::cli
