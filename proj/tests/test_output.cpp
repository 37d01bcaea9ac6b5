// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "muonlab/csv.hpp"
#include "muonlab/error.hpp"
#include "muonlab/lower_bounds.hpp"
#include "muonlab/random.hpp"
#include "muonlab/svg.hpp"

using namespace muonlab;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("format_double round-trips") {
  RandomStream rng(1, 1);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(rng.gaussian(), static_cast<int>(rng.index(600)) - 300);
    CHECK(double_bits(std::stod(format_double(v))) == double_bits(v));
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-1.0) == "-1");
}

TEST_CASE("trajectory CSV round trip") {
  TrajectoryResult r;
  RandomStream rng(2, 2);
  for (std::size_t t = 0; t < 40; ++t) {
    TrajectoryRecord rec;
    rec.t = t;
    rec.eta = rng.uniform(1e-6, 1.0);
    rec.loss = std::exp(-rng.uniform(0.0, 60.0));
    rec.spectral_error = rng.uniform01();
    rec.grad_sigma_min = t % 3 == 0 ? -1.0 : rng.uniform01();
    r.records.push_back(rec);
  }
  const std::string text = trajectory_csv(r);
  CHECK(text.rfind(std::string(kTrajectoryHeader) + "\n", 0) == 0);
  CHECK(text.find('\r') == std::string::npos);
  const auto back = parse_trajectory_csv(text);
  REQUIRE(back.size() == r.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].t == r.records[i].t);
    CHECK(double_bits(back[i].eta) == double_bits(r.records[i].eta));
    CHECK(double_bits(back[i].loss) == double_bits(r.records[i].loss));
    CHECK(double_bits(back[i].spectral_error) == double_bits(r.records[i].spectral_error));
    CHECK(double_bits(back[i].grad_sigma_min) == double_bits(r.records[i].grad_sigma_min));
  }

  r.aborted = true;
  r.diagnostic = "non-finite loss at t=40";
  const std::string aborted = trajectory_csv(r);
  CHECK(aborted.find("# aborted: non-finite loss at t=40\n") != std::string::npos);
  CHECK(parse_trajectory_csv(aborted).size() == 40);
  CHECK_THROWS_AS(parse_trajectory_csv("t,eta\n1,2\n"), Error);
}

TEST_CASE("summary CSV round trip") {
  const std::vector<SummaryRow> rows = {
      {"muon", 625, 2, 0, 1e-6, 17, "muon_kappa625_rep0.csv"},
      {"gd", 5, 3, 1, 1e-10, kNeverHit, "gd_kappa5_k3_rep1.csv"},
  };
  const std::string text = summary_csv(rows);
  CHECK(text.find(",inf,") != std::string::npos);
  const auto back = parse_summary_csv(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].algorithm == "muon");
  CHECK(back[0].first_hit == 17);
  CHECK(back[1].first_hit == kNeverHit);
  CHECK(back[1].k == 3);
  CHECK(back[1].epsilon == 1e-10);
  CHECK(back[1].file == rows[1].file);
}

TEST_CASE("svg line plot") {
  PlotAxes axes;
  axes.title = "error";
  const std::string one = emit_svg_plot({{"muon", {0, 1, 2}, {1, 0.1, 0.01}}}, axes);
  CHECK(one.rfind("<svg", 0) == 0);
  CHECK(count(one, "<polyline") == 1);
  CHECK(one.find("class=\"warning\"") == std::string::npos);
  // three points, y descending on the page means increasing screen coordinate
  const auto start = one.find("points=\"") + 8;
  const std::string pts = one.substr(start, one.find('"', start) - start);
  std::vector<double> ys;
  for (std::size_t p = 0; p < pts.size();) {
    const std::size_t comma = pts.find(',', p);
    const std::size_t space = pts.find(' ', comma);
    ys.push_back(std::stod(pts.substr(comma + 1, space - comma - 1)));
    if (space == std::string::npos) break;
    p = space + 1;
  }
  REQUIRE(ys.size() == 3);
  CHECK(ys[0] < ys[1]);
  CHECK(ys[1] < ys[2]);

  std::vector<PlotSeries> five;
  for (int i = 0; i < 5; ++i) five.push_back({"kappa=" + std::to_string(i), {0, 1}, {1.0, 0.5 / (i + 1)}});
  const std::string many = emit_svg_plot(five, axes);
  CHECK(count(many, "<polyline") == 5);
  CHECK(count(many, "class=\"legend\"") == 5);
  for (int i = 0; i < 5; ++i) CHECK(many.find(">kappa=" + std::to_string(i) + "<") != std::string::npos);
  CHECK(emit_svg_plot(five, axes) == many);

  const std::string clamped = emit_svg_plot({{"zero", {0, 1, 2}, {1, 0, -1}}}, axes);
  CHECK(clamped.find("class=\"warning\"") != std::string::npos);
  const std::string nan_series =
      emit_svg_plot({{"nan", {0, 1}, {1, std::numeric_limits<double>::quiet_NaN()}}}, axes);
  CHECK(nan_series.find("class=\"warning\"") != std::string::npos);

  CHECK_THROWS_AS(emit_svg_plot({}, axes), Error);
  CHECK_THROWS_AS(emit_svg_plot({{"empty", {}, {}}}, axes), Error);
}

TEST_CASE("svg heatmap") {
  const std::string h = emit_svg_heatmap(DenseMatrix{{1, -1}, {0.5, 0}}, "block");
  CHECK(count(h, "<rect") >= 4);
  CHECK(h.find("block") != std::string::npos);
  CHECK(emit_svg_heatmap(DenseMatrix(2, 2), "zero").find("<svg") == 0);
}

TEST_CASE("file helpers") {
  CHECK_THROWS_AS(read_text_file("/nonexistent/dir/file.txt"), Error);
  CHECK_THROWS_AS(write_text_file("/nonexistent/dir/file.txt", "x"), Error);
}
