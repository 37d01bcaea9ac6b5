// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "muonlab/error.hpp"
#include "muonlab/linalg.hpp"
#include "muonlab/lower_bounds.hpp"
#include "muonlab/optimizers.hpp"
#include "muonlab/oracle.hpp"
#include "muonlab/problems.hpp"
#include "muonlab/random.hpp"
#include "muonlab/verify.hpp"

using namespace muonlab;

namespace {

struct FullRun {
  std::vector<DenseMatrix> iterates;
  std::vector<double> etas;  // steps actually applied
};

FullRun simplified_muon(const ProblemInstance& p, const DenseMatrix& init, Schedule sched, std::size_t T,
                        RandomStream& rng) {
  AlgoConfig algo;
  TrajectoryOptions opts;
  opts.keep_iterates = true;
  opts.sigma_min_max_dim = 0;
  const TrajectoryResult r = run_trajectory(p, algo, sched, init, T, rng, opts);
  FullRun out;
  out.iterates = r.iterates;
  for (std::size_t t = 0; t + 1 < r.records.size(); ++t) out.etas.push_back(r.records[t].eta);
  return out;
}

}  // namespace

TEST_CASE("scalar Muon recursion hand cases") {
  const ScalarTrace a = scalar_muon_trajectory(0.5, 1.0, 1.0, 0.5, 1.0, 6);
  REQUIRE(a.values.size() == 7);
  REQUIRE(a.etas.size() == 6);
  CHECK(a.values[1] == 1.5);
  CHECK(a.values[2] == 1.0);
  for (std::size_t t = 2; t < a.values.size(); ++t) CHECK(a.values[t] == 1.0);
  const BoundCheck ca = check_scalar_mf_bounds(a);
  CHECK(ca.pass);
  CHECK(ca.hypotheses_ok);
  CHECK(ca.violations == 0);

  const ScalarTrace fixed = scalar_muon_trajectory(0.5, 0.25, 1.0, 0.5, 1.0, 20);
  for (double v : fixed.values) CHECK(v == 0.5);
  const BoundCheck cf = check_scalar_mf_bounds(fixed);
  CHECK(cf.pass);
  CHECK(cf.worst_margin > 0.0);

  const ScalarTrace zero = scalar_muon_trajectory(1.0, 0.0, 1.0, 0.5, 1.0, 30);
  for (std::size_t t = 1; t < zero.values.size(); ++t) CHECK(std::fabs(zero.values[t]) <= zero.etas[t - 1]);
  CHECK(check_scalar_mf_bounds(zero).pass);

  CHECK_THROWS_AS(scalar_muon_trajectory(0.0, 1.0, 1.0, 0.5, 1.0, 3), Error);
  CHECK_THROWS_AS(scalar_muon_trajectory(0.5, 2.0, 1.0, 0.5, 1.0, 3), Error);
  CHECK_THROWS_AS(scalar_muon_trajectory(0.5, 1.0, 1.0, 0.4, 1.0, 3), Error);
}

TEST_CASE("hypothesis violations are reported separately from bound violations") {
  const ScalarTrace big = scalar_muon_trajectory(0.5, 1.0, 1.0, 0.5, 3.0, 10);
  const BoundCheck c = check_scalar_mf_bounds(big);
  CHECK_FALSE(c.hypotheses_ok);
  CHECK(c.note.find("prefactor") != std::string::npos);
  const ScalarTrace far = scalar_muon_trajectory(5.0, 1.0, 1.0, 0.5, 1.0, 10);
  CHECK_FALSE(check_scalar_mf_bounds(far).hypotheses_ok);
}

TEST_CASE("random fixed-prefactor sweep") {
  RandomStream rng(1, 1);
  for (int i = 0; i < 1000; ++i) {
    const double lmax = rng.uniform(0.1, 10.0);
    const double ls = rng.uniform(0.0, 1.0) * lmax;
    const double c = rng.uniform(1.0, 2.0);
    const double eta0 = c * std::sqrt(lmax);
    const double u0 = eta0 * (1.0 - rng.uniform01());
    const BoundCheck b = check_scalar_mf_bounds(scalar_muon_trajectory(u0, ls, lmax, 0.5, c, 100));
    REQUIRE(b.hypotheses_ok);
    CHECK(b.pass);
  }
}

TEST_CASE("per-step prefactor sweep") {
  RandomStream rng(2, 2);
  for (int i = 0; i < 300; ++i) {
    const double rho = rng.uniform(2.0 / 3.0, 0.95);
    const double lmax = rng.uniform(0.1, 10.0);
    const double ls = rng.uniform(0.0, 1.0) * lmax;
    const double u0 = std::sqrt(lmax) * (1.0 - rng.uniform01());
    const ScalarTrace tr = scalar_muon_trajectory(u0, ls, lmax, rho, rng, 200);
    CHECK(tr.kind == TraceKind::MfPerStepPrefactor);
    const BoundCheck b = check_scalar_mf_bounds(tr);
    REQUIRE(b.hypotheses_ok);
    CHECK(b.pass);
  }
}

TEST_CASE("scalar ICL recursion") {
  const ScalarTrace a = scalar_icl_trajectory(2.0, 1.0, 0.5, 1.0, 5);
  CHECK(a.values[0] == 0.0);
  CHECK(a.values[1] == 1.0);
  CHECK(a.values[2] == 0.5);
  CHECK(a.values[3] == 0.5);
  CHECK(check_scalar_icl_bounds(a).pass);

  const ScalarTrace hit = scalar_icl_trajectory(1.0, 1.0, 0.5, 1.0, 5);
  for (std::size_t t = 1; t < hit.values.size(); ++t) CHECK(hit.values[t] == 1.0);

  RandomStream rng(3, 3);
  for (int i = 0; i < 1000; ++i) {
    const double lmin = rng.uniform(0.1, 2.0);
    const double ls = lmin * rng.uniform(1.0, 50.0);
    const BoundCheck b = check_scalar_icl_bounds(scalar_icl_trajectory(ls, lmin, 0.5, rng.uniform(1.0, 2.0), 100));
    REQUIRE(b.hypotheses_ok);
    CHECK(b.pass);
  }
  CHECK_THROWS_AS(scalar_icl_trajectory(0.5, 1.0, 0.5, 1.0, 3), Error);
}

TEST_CASE("decoupled MF trajectory on the d=2 example") {
  const MfInstance inst = mf_instance_from(DenseMatrix::column({1, 0}), {1.0}, 1);
  AlignedInit init;
  init.v_aug = DenseMatrix::column({1, 0});
  init.sigma0 = {0.5};
  init.o_init = DenseMatrix::identity(1);
  const DiagonalTrajectory tr = decoupled_mf_trajectory(inst, init, {1.0, 0.5});
  REQUIRE(tr.steps() == 3);
  CHECK(tr.sigma[1][0] == 1.5);
  CHECK(tr.sigma[2][0] == 1.0);
  const DenseMatrix u2 = tr.iterate(2);
  CHECK(max_abs_diff(matmul_nt(u2, u2), inst.target) == 0.0);
}

TEST_CASE("decoupled MF trajectory from the exact factorization is stationary") {
  RandomStream rng(4, 4);
  AlignedSetup s = make_aligned_mf_setup(rng, 6, 3, 3, 9, 1.0, 1.0, 0.0);
  for (std::size_t i = 0; i < 3; ++i) s.init.sigma0[i] = std::sqrt(s.instance.eigenvalues[i]);
  const DiagonalTrajectory tr = decoupled_mf_trajectory(s.instance, s.init, geometric_etas(1.0, 0.5, 10));
  for (std::size_t t = 0; t < tr.steps(); ++t) {
    CHECK(tr.sigma[t] == s.init.sigma0);
    CHECK(mf_spectral_error(s.instance, tr.iterate(t)) <= 1e-14);
  }
}

TEST_CASE("MF spectral error equals the largest per-mode error") {
  RandomStream rng(5, 5);
  const AlignedSetup s = make_aligned_mf_setup(rng, 10, 3, 5, 25, 2.0, std::sqrt(2.0), std::sqrt(2.0) / 2);
  const DiagonalTrajectory tr = decoupled_mf_trajectory(s.instance, s.init, geometric_etas(std::sqrt(2.0), 0.5, 20));
  for (std::size_t t = 0; t < tr.steps(); ++t) {
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.sigma[t].size(); ++i) {
      worst = std::max(worst, std::fabs(tr.sigma[t][i] * tr.sigma[t][i] - tr.lambda_aug[i]));
    }
    CHECK(std::fabs(mf_spectral_error(s.instance, tr.iterate(t)) - worst) <= 1e-12);
  }
}

TEST_CASE("decoupled ICL trajectory") {
  const IclInstance diag = icl_instance_from(DenseMatrix::diag({2, 1}));
  const DiagonalTrajectory tr = decoupled_icl_trajectory(diag, geometric_etas(1.0, 0.5, 6));
  CHECK(max_abs_diff(tr.iterate(1), DenseMatrix::identity(2)) <= 1e-15);
  // the first Muon step from Q = 0 lands on the same point
  MuonState st;
  const DenseMatrix q1 = muon_step(DenseMatrix(2, 2), icl_loss_grad(diag, DenseMatrix(2, 2)).grad, st, 1.0);
  CHECK(max_abs_diff(q1, tr.iterate(1)) <= 1e-15);
  for (std::size_t t = 0; t + 1 < tr.steps(); ++t) {
    CHECK(icl_spectral_error(diag, tr.iterate(t + 1)) <= std::pow(0.5, static_cast<double>(t)) + 1e-15);
  }

  const IclInstance flat = icl_instance_from(3.0 * DenseMatrix::identity(4));
  const DiagonalTrajectory ft = decoupled_icl_trajectory(flat, geometric_etas(1.0 / 3.0, 0.5, 8));
  for (const auto& sig : ft.sigma)
    for (double v : sig) CHECK(v == sig[0]);
}

TEST_CASE("oracle vs full simplified Muon") {
  SUBCASE("MF aligned init") {
    RandomStream rng(6, 6);
    const double eta0 = 1.0;  // C = 1, lambda_max = 1
    const AlignedSetup s = make_aligned_mf_setup(rng, 20, 4, 7, 25, 1.0, eta0, eta0 / 2);
    const FullRun full = simplified_muon(s.instance, s.init.u0(),
                                         Schedule::exponential(0.5, 1.0, PrefactorMode::FixedOnce, 1.0, 1.0), 50, rng);
    const DiagonalTrajectory orc = decoupled_mf_trajectory(s.instance, s.init, full.etas);
    CHECK(oracle_vs_full_divergence(orc, full.iterates) <= 1e-10);
  }
  SUBCASE("ICL from zero") {
    // C drawn from [1, 2): with C = 1 the sigma_min mode lands on 1/lambda
    // exactly and msign then acts on a rounding-level residual.
    RandomStream rng(7, 7);
    const IclInstance inst = make_icl_instance(rng, 20, 5.0, 1.0);
    const FullRun full =
        simplified_muon(inst, DenseMatrix(20, 20), Schedule::exponential(0.5, 1.0, PrefactorMode::FixedOnce), 50, rng);
    const DiagonalTrajectory orc = decoupled_icl_trajectory(inst, full.etas);
    CHECK(oracle_vs_full_divergence(orc, full.iterates) <= 1e-10);
  }
  SUBCASE("T = 0 and mismatched lengths") {
    RandomStream rng(8, 8);
    const AlignedSetup s = make_aligned_mf_setup(rng, 5, 2, 2, 4, 1.0, 1.0, 0.5);
    const DiagonalTrajectory orc = decoupled_mf_trajectory(s.instance, s.init, {});
    CHECK(oracle_vs_full_divergence(orc, {orc.iterate(0)}) == 0.0);
    CHECK_THROWS_AS(oracle_vs_full_divergence(orc, {orc.iterate(0), orc.iterate(0)}), Error);
  }
  SUBCASE("suite helper") {
    const CheckResult r = check_decoupling(msign_exact, 12, 3, 60, 21);
    INFO(r.detail);
    CHECK(r.pass);
  }
}
