// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "muonlab/matrix.hpp"

namespace muonlab {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotAxes {
  std::string title;
  std::string x_label = "iteration";
  std::string y_label = "spectral error";
  bool log_y = true;
  int width = 640;
  int height = 420;
};

// Self-contained SVG line plot. Nonpositive or non-finite values on a log
// axis are clamped to 1e-300 and flagged with a warning annotation.
std::string emit_svg_plot(const std::vector<PlotSeries>& series, const PlotAxes& axes);

// k x k heatmap with a diverging palette scaled to max |entry|.
std::string emit_svg_heatmap(const DenseMatrix& m, const std::string& title);

}  // namespace muonlab
