// SPDX-License-Identifier: Apache-2.0
#include "muonlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "muonlab/error.hpp"

namespace muonlab {
namespace {

constexpr double kFloor = 1e-300;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string fixed(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
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

std::string short_number(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string emit_svg_plot(const std::vector<PlotSeries>& series, const PlotAxes& axes) {
  if (series.empty()) throw Error(ErrorKind::Precondition, "emit_svg_plot: no series");
  const double left = 80, right = 170, top = 40, bottom = 55;
  const double w = axes.width, h = axes.height;
  const double pw = w - left - right, ph = h - top - bottom;

  std::size_t clamped = 0;
  std::vector<std::vector<double>> ys;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const PlotSeries& s : series) {
    if (s.x.size() != s.y.size()) throw Error(ErrorKind::Shape, "emit_svg_plot: x/y length mismatch in " + s.label);
    if (s.x.empty()) throw Error(ErrorKind::Precondition, "emit_svg_plot: series '" + s.label + "' has no points");
    std::vector<double> y = s.y;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (axes.log_y) {
        if (!(y[i] > 0.0) || !std::isfinite(y[i])) {
          y[i] = std::isinf(y[i]) && y[i] > 0.0 ? 1e300 : kFloor;
          ++clamped;
        }
        y[i] = std::log10(std::max(y[i], kFloor));
      } else if (!std::isfinite(y[i])) {
        y[i] = 0.0;
        ++clamped;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, y[i]);
      ymax = std::max(ymax, y[i]);
    }
    ys.push_back(std::move(y));
  }
  if (!(xmin <= xmax)) xmin = 0, xmax = 1;
  if (!(ymin <= ymax)) ymin = 0, ymax = 1;
  if (axes.log_y) {
    ymin = std::floor(ymin);
    ymax = std::ceil(ymax);
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(axes.width) + "\" height=\"" +
       std::to_string(axes.height) + "\" viewBox=\"0 0 " + std::to_string(axes.width) + " " +
       std::to_string(axes.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + fixed(left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
       escape(axes.title) + "</text>\n";
  o += "<rect x=\"" + fixed(left) + "\" y=\"" + fixed(top) + "\" width=\"" + fixed(pw) + "\" height=\"" + fixed(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";

  // y ticks: decades on a log axis, five even ticks otherwise
  const int ny = axes.log_y ? static_cast<int>(ymax - ymin) : 5;
  const int ystride = std::max(1, ny / 10);
  for (int i = 0; i <= ny; i += ystride) {
    const double v = ymin + (ymax - ymin) * i / ny;
    const std::string label = axes.log_y ? "1e" + std::to_string(static_cast<int>(std::lround(v))) : short_number(v);
    o += "<line x1=\"" + fixed(left - 4) + "\" y1=\"" + fixed(py(v)) + "\" x2=\"" + fixed(left + pw) + "\" y2=\"" +
         fixed(py(v)) + "\" stroke=\"#dddddd\"/>\n";
    o += "<text x=\"" + fixed(left - 7) + "\" y=\"" + fixed(py(v) + 4) + "\" text-anchor=\"end\">" + label +
         "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double v = xmin + (xmax - xmin) * i / 5.0;
    o += "<text x=\"" + fixed(px(v)) + "\" y=\"" + fixed(top + ph + 18) + "\" text-anchor=\"middle\">" +
         short_number(v) + "</text>\n";
  }
  o += "<text x=\"" + fixed(left + pw / 2) + "\" y=\"" + fixed(h - 12) + "\" text-anchor=\"middle\">" +
       escape(axes.x_label) + "</text>\n";
  o += "<text transform=\"translate(18," + fixed(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
       escape(axes.y_label) + (axes.log_y ? " (log scale)" : "") + "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
    o += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < ys[s].size(); ++i) {
      if (i) o += ' ';
      o += fixed(px(series[s].x[i])) + "," + fixed(py(ys[s][i]));
    }
    o += "\"><title>" + escape(series[s].label) + "</title></polyline>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    o += "<line x1=\"" + fixed(left + pw + 12) + "\" y1=\"" + fixed(ly) + "\" x2=\"" + fixed(left + pw + 36) +
         "\" y2=\"" + fixed(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    o += "<text class=\"legend\" x=\"" + fixed(left + pw + 42) + "\" y=\"" + fixed(ly + 4) + "\">" +
         escape(series[s].label) + "</text>\n";
  }
  if (clamped > 0) {
    o += "<text class=\"warning\" x=\"" + fixed(left + 6) + "\" y=\"" + fixed(top + ph - 6) +
         "\" fill=\"#b00000\">warning: " + std::to_string(clamped) + " value(s) clamped to 1e-300</text>\n";
  }
  o += "</svg>\n";
  return o;
}

std::string emit_svg_heatmap(const DenseMatrix& m, const std::string& title) {
  if (m.empty()) throw Error(ErrorKind::Precondition, "emit_svg_heatmap: empty matrix");
  const double cell = 40, left = 20, top = 40;
  const double w = left * 2 + cell * static_cast<double>(m.cols()) + 80;
  const double h = top + cell * static_cast<double>(m.rows()) + 30;
  const double scale = max_abs(m) > 0.0 ? max_abs(m) : 1.0;
  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(w) + "\" height=\"" + fixed(h) +
       "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + fixed(left) + "\" y=\"22\" font-size=\"13\">" + escape(title) + "</text>\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double v = m(i, j) / scale;  // in [-1, 1]
      const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::fabs(v))));
      char color[16];
      if (v >= 0) std::snprintf(color, sizeof color, "#ff%02x%02x", fade, fade);
      else std::snprintf(color, sizeof color, "#%02x%02xff", fade, fade);
      o += "<rect x=\"" + fixed(left + cell * static_cast<double>(j)) + "\" y=\"" +
           fixed(top + cell * static_cast<double>(i)) + "\" width=\"" + fixed(cell) + "\" height=\"" + fixed(cell) +
           "\" fill=\"" + color + "\" stroke=\"#999999\"><title>" + short_number(m(i, j)) + "</title></rect>\n";
    }
  }
  o += "<text x=\"" + fixed(left + cell * static_cast<double>(m.cols()) + 10) + "\" y=\"" + fixed(top + 12) +
       "\">max |.| = " + short_number(scale) + "</text>\n";
  o += "</svg>\n";
  return o;
}

}  // namespace muonlab
