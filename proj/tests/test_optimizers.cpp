// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "muonlab/error.hpp"
#include "muonlab/linalg.hpp"
#include "muonlab/optimizers.hpp"
#include "muonlab/oracle.hpp"
#include "muonlab/problems.hpp"
#include "muonlab/random.hpp"

using namespace muonlab;

TEST_CASE("exponential schedule") {
  RandomStream rng(1, 1);
  Schedule s = Schedule::exponential(0.5, 1.0, PrefactorMode::FixedOnce, 1.0, 1.0);
  CHECK(s.eta(0, 0.0, rng) == 1.0);
  CHECK(s.eta(1, 0.0, rng) == 0.5);
  CHECK(s.eta(2, 0.0, rng) == 0.25);

  Schedule fixed = Schedule::exponential(0.7, 3.0, PrefactorMode::FixedOnce);
  double prev = fixed.eta(0, 0.0, rng);
  const double c = fixed.last_prefactor();
  CHECK(c >= 1.0);
  CHECK(c < 2.0);
  for (std::size_t t = 1; t < 50; ++t) {
    const double e = fixed.eta(t, 0.0, rng);
    CHECK(e <= prev);
    CHECK(e > 0.0);
    CHECK(fixed.last_prefactor() == c);
    prev = e;
  }

  const double root = std::sqrt(4.0);
  Schedule per = Schedule::exponential(0.8, root, PrefactorMode::PerIteration);
  double prev_eta = per.eta(0, 0.0, rng), prev_c = per.last_prefactor();
  for (std::size_t t = 1; t < 200; ++t) {
    const double e = per.eta(t, 0.0, rng);
    const double ratio = e / (root * std::pow(0.8, static_cast<double>(t)));
    CHECK(ratio >= 1.0 - 1e-12);
    CHECK(ratio <= 2.0 + 1e-12);
    CHECK(e <= 2.0 * 0.8 * (prev_eta / prev_c) * (1.0 + 1e-12));
    prev_eta = e;
    prev_c = per.last_prefactor();
  }
}

TEST_CASE("plateau schedule decays by 0.3 after 50 stalled calls") {
  RandomStream rng(2, 2);
  Schedule s = Schedule::plateau(0.1);
  CHECK(s.eta(0, 1.0, rng) == 0.1);
  for (std::size_t t = 1; t < 50; ++t) CHECK(s.eta(t, 1.0, rng) == 0.1);
  CHECK(s.eta(50, 1.0, rng) == doctest::Approx(0.03).epsilon(1e-15));
  CHECK(s.stall_counter() == 0);
  CHECK(s.eta(51, 0.5, rng) == doctest::Approx(0.03).epsilon(1e-15));

  Schedule noisy = Schedule::plateau(1.0);
  double prev = noisy.eta(0, 10.0, rng);
  for (std::size_t t = 1; t < 2000; ++t) {
    const double e = noisy.eta(t, rng.uniform(0.0, 10.0), rng);
    CHECK(e <= prev);
    prev = e;
  }
}

TEST_CASE("plateau threshold: negligible improvements count as stalls") {
  RandomStream rng(2, 3);
  // A best loss creeping down by ~1e-15 relative per call still decays.
  Schedule s = Schedule::plateau(0.1);
  double loss = 1.0;
  s.eta(0, loss, rng);
  for (std::size_t t = 1; t < 50; ++t) CHECK(s.eta(t, loss *= 1.0 - 1e-15, rng) == 0.1);
  CHECK(s.eta(50, loss *= 1.0 - 1e-15, rng) == doctest::Approx(0.03).epsilon(1e-15));

  // Threshold 0 treats any strict decrease as progress.
  Schedule strict = Schedule::plateau(0.1, 0.3, 50, 0.0);
  loss = 1.0;
  for (std::size_t t = 0; t < 200; ++t) CHECK(strict.eta(t, loss *= 1.0 - 1e-15, rng) == 0.1);

  // Improvements above the threshold reset the counter.
  Schedule real = Schedule::plateau(0.1);
  loss = 1.0;
  for (std::size_t t = 0; t < 200; ++t) CHECK(real.eta(t, loss *= 0.999, rng) == 0.1);

  CHECK_THROWS_AS(Schedule::plateau(0.1, 0.3, 50, -1e-3), Error);
  CHECK_THROWS_AS(Schedule::plateau(0.1, 0.3, 50, 1.0), Error);
}

TEST_CASE("muon_step") {
  MuonState st;
  const DenseMatrix x = DenseMatrix::column({2, 0});
  const DenseMatrix g = DenseMatrix::column({6, 0});
  const DenseMatrix x1 = muon_step(x, g, st, 0.5);
  CHECK(x1(0, 0) == 1.5);
  CHECK(x1(1, 0) == 0.0);

  MuonState zst;
  StepInfo info;
  CHECK(max_abs_diff(muon_step(x, DenseMatrix(2, 1), zst, 0.5, MsignBackend::Exact, {}, &info), x) == 0.0);
  CHECK(info.zero_direction);

  RandomStream rng(3, 3);
  const DenseMatrix u = gaussian_matrix(rng, 5, 3);
  const DenseMatrix grad = gaussian_matrix(rng, 5, 3);
  MuonState m9;
  m9.mu = 0.9;
  MuonState m0;
  CHECK(max_abs_diff(muon_step(u, grad, m9, 0.1), muon_step(u, grad, m0, 0.1)) == 0.0);
  // second step carries the buffer
  const DenseMatrix g2 = gaussian_matrix(rng, 5, 3);
  const DenseMatrix with_mom = muon_step(u, g2, m9, 0.1);
  CHECK(max_abs_diff(with_mom, u - 0.1 * msign_exact(g2 + 0.9 * grad)) <= 1e-15);

  MuonState plain;
  const DenseMatrix direct = u - 0.3 * msign_exact(grad);
  CHECK(max_abs_diff(muon_step(u, grad, plain, 0.3), direct) == 0.0);
  CHECK(std::fabs(spectral_norm(muon_step(u, grad, plain, 0.3) - u) - 0.3) <= 1e-10);

  MuonState ns_state;
  const DenseMatrix ns = muon_step(u, grad, ns_state, 0.3, MsignBackend::NewtonSchulz);
  CHECK(max_abs_diff(ns, direct) <= 1e-6);
  CHECK_THROWS_AS(muon_step(u, DenseMatrix(5, 2), plain, 0.1), Error);
}

TEST_CASE("gd_step") {
  const DenseMatrix x = DenseMatrix::column({2, 0});
  const DenseMatrix g = DenseMatrix::column({6, 0});
  const DenseMatrix x1 = gd_step(x, g, 0.1);
  CHECK(x1(0, 0) == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(x1(1, 0) == 0.0);
  CHECK(max_abs_diff(gd_step(x, DenseMatrix(2, 1), 0.1), x) == 0.0);
  RandomStream rng(4, 4);
  const DenseMatrix a = gaussian_matrix(rng, 3, 3), b = gaussian_matrix(rng, 3, 3);
  CHECK(max_abs_diff(gd_step(a, b, 0.25) - a, -0.25 * b) <= 1e-15);
  CHECK_THROWS_AS(gd_step(a, DenseMatrix(3, 2), 0.1), Error);
}

TEST_CASE("signgd_step") {
  const DenseMatrix x = DenseMatrix::column({2, 0});
  const DenseMatrix x1 = signgd_step(x, DenseMatrix::column({6, 0}), 0.5);
  CHECK(x1(0, 0) == 1.5);
  CHECK(x1(1, 0) == 0.0);
  const DenseMatrix up = signgd_step(DenseMatrix{{1, 2}, {3, 4}}, DenseMatrix{{-1, -2}, {-0.1, -9}}, 0.25);
  CHECK(max_abs_diff(up, DenseMatrix{{1.25, 2.25}, {3.25, 4.25}}) == 0.0);
  RandomStream rng(5, 5);
  const DenseMatrix a = gaussian_matrix(rng, 4, 3), g = gaussian_matrix(rng, 4, 3);
  CHECK(max_abs_diff(signgd_step(a, g, 0.1), signgd_step(a, 17.0 * g, 0.1)) == 0.0);
}

TEST_CASE("scaledgd_step") {
  const DenseMatrix u1 = scaledgd_step(DenseMatrix::column({2, 0}), DenseMatrix::column({6, 0}), 0.5);
  CHECK(u1(0, 0) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(u1(1, 0) == 0.0);
  RandomStream rng(6, 6);
  const DenseMatrix u = gaussian_matrix(rng, 6, 3), g = gaussian_matrix(rng, 6, 3);
  CHECK(max_abs_diff(scaledgd_step(u, DenseMatrix(6, 3), 0.5), u) == 0.0);
  const DenseMatrix o = haar_orthonormal(rng, 3, 3);
  CHECK(max_abs_diff(scaledgd_step(matmul(u, o), matmul(g, o), 0.2), matmul(scaledgd_step(u, g, 0.2), o)) <= 1e-10);
  DenseMatrix singular(3, 2);
  singular(0, 0) = 1.0;
  try {
    scaledgd_step(singular, gaussian_matrix(rng, 3, 2), 0.1);
    FAIL("expected a singular Gram error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RankDeficient);
  }
}

TEST_CASE("run_trajectory") {
  RandomStream rng(7, 7);
  const ProblemInstance p = make_mf_instance(rng, 6, 2, 3, 5, 1.0);
  const DenseMatrix init = 0.1 * haar_orthonormal(rng, 6, 3);

  SUBCASE("zero step keeps the iterate") {
    Schedule s = Schedule::constant(0.0);
    AlgoConfig algo;
    algo.algorithm = Algorithm::GD;
    const TrajectoryResult r = run_trajectory(p, algo, s, init, 10, rng);
    REQUIRE(r.records.size() == 11);
    for (const auto& rec : r.records) {
      CHECK(rec.loss == r.records.front().loss);
      CHECK(rec.grad_sigma_min >= 0.0);
    }
    CHECK(max_abs_diff(r.final_iterate, init) == 0.0);
  }
  SUBCASE("determinism") {
    AlgoConfig algo;
    Schedule a = Schedule::exponential(0.9, 1.0, PrefactorMode::PerIteration);
    Schedule b = Schedule::exponential(0.9, 1.0, PrefactorMode::PerIteration);
    RandomStream ra(8, 8), rb(8, 8);
    const TrajectoryResult x = run_trajectory(p, algo, a, init, 30, ra);
    const TrajectoryResult y = run_trajectory(p, algo, b, init, 30, rb);
    REQUIRE(x.records.size() == y.records.size());
    for (std::size_t i = 0; i < x.records.size(); ++i) {
      CHECK(double_bits(x.records[i].loss) == double_bits(y.records[i].loss));
      CHECK(double_bits(x.records[i].eta) == double_bits(y.records[i].eta));
    }
  }
  SUBCASE("early stop and shape errors") {
    AlgoConfig algo;
    Schedule s = Schedule::exponential(0.5, 1.0, PrefactorMode::FixedOnce, 1.0, 1.0);
    TrajectoryOptions opts;
    opts.stop_error = 1e300;
    CHECK(run_trajectory(p, algo, s, init, 10, rng, opts).records.size() == 1);
    CHECK_THROWS_AS(run_trajectory(p, algo, s, DenseMatrix(6, 2), 10, rng), Error);
    CHECK_THROWS_AS(run_trajectory(p, algo, s, init, 0, rng), Error);
  }
  SUBCASE("divergence aborts with a diagnostic") {
    AlgoConfig algo;
    algo.algorithm = Algorithm::GD;
    Schedule s = Schedule::constant(1e6);
    const TrajectoryResult r = run_trajectory(p, algo, s, DenseMatrix(6, 3, std::vector<double>(18, 1.0)), 50, rng);
    CHECK(r.aborted);
    CHECK(r.diagnostic.find("non-finite") != std::string::npos);
  }
  SUBCASE("sigma_min logging is gated by dimension") {
    AlgoConfig algo;
    Schedule s = Schedule::constant(0.01);
    TrajectoryOptions opts;
    opts.sigma_min_max_dim = 5;
    const TrajectoryResult r = run_trajectory(p, algo, s, init, 3, rng, opts);
    for (const auto& rec : r.records) CHECK(rec.grad_sigma_min == -1.0);
  }
}

TEST_CASE("Muon from an aligned init meets the final-error bound") {
  RandomStream rng(9, 9);
  const double rho = 0.5;
  const std::size_t T = 30;
  const AlignedSetup setup = make_aligned_mf_setup(rng, 12, 3, 3, 25, 1.0, 1.0, 0.5);
  const ProblemInstance p = setup.instance;
  Schedule s = Schedule::exponential(rho, 1.0, PrefactorMode::FixedOnce, 1.0, 1.0);
  AlgoConfig algo;
  const TrajectoryResult r = run_trajectory(p, algo, s, setup.init.u0(), T, rng);
  REQUIRE(r.records.size() == T + 1);
  CHECK(r.records.back().spectral_error <= 8.0 * std::pow(rho, static_cast<double>(T - 1)));
}
