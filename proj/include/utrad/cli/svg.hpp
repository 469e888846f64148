#pragma once

#include <string>
#include <utility>
#include <vector>

namespace utrad::cli::svg {

struct Series {
  std::string label;
  std::vector<double> values;
};

/// Box (quartiles, median) and whiskers (min, max) per series on a [0, 1]
/// axis, with the individual points overlaid.
std::string boxplot(const std::string& title, const std::vector<Series>& series);

/// Scatter of (x, y) points plus a sampled curve and an optional vertical
/// marker.
struct CurvePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<std::pair<double, double>> points;
  std::vector<std::pair<double, double>> curve;
  double marker_x = -1.0;  ///< negative: none
  std::string marker_label;
};
std::string curve(const CurvePlot& plot);

/// One column of jittered points per group and an optional horizontal
/// threshold line.
std::string strip(const std::string& title, const std::vector<Series>& groups, double threshold,
                  bool show_threshold);

}  // namespace utrad::cli::svg
