// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "muonlab/error.hpp"
#include "muonlab/linalg.hpp"
#include "muonlab/lower_bounds.hpp"
#include "muonlab/verify.hpp"

using namespace muonlab;

TEST_CASE("hard quadratic") {
  const HardQuadratic q3 = build_hard_quadratic(3);
  CHECK(max_abs_diff(q3.h, DenseMatrix{{2, 1}, {1, 2}}) == 0.0);
  const SymEigFactors e = symmetric_eig(q3.h);
  CHECK(e.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(e.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(max_abs_diff(build_hard_quadratic(1).h, DenseMatrix::identity(2)) == 0.0);
  const HardQuadratic big = build_hard_quadratic(625);
  CHECK(max_abs_diff(matmul(matmul(big.r.transposed(), big.h), big.r), DenseMatrix::diag({625, 1})) <= 1e-12 * 625);
  const Vec2 z = rotate(big, {0.3, -0.7});
  const Vec2 back = unrotate(big, z);
  CHECK(back[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(back[1] == doctest::Approx(-0.7).epsilon(1e-15));
  CHECK_THROWS_AS(build_hard_quadratic(0.5), Error);
}

TEST_CASE("adversarial init, kappa = 2") {
  const auto etas = geometric_etas(1.0, 0.5, 11);
  const AdversarialInit init = adversarial_quadratic_init(2.0, 0.05, etas, 10);
  CHECK(init.T0 == 2);
  REQUIRE(init.x1_chain.size() == 3);
  CHECK(init.x1_chain[2] == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(init.x1_chain[1] == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(init.x1_chain[0] == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(init.x0[0] == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(init.x0[1] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(init.z0[0] == doctest::Approx(0.525).epsilon(1e-14));
  CHECK(init.z0[1] == doctest::Approx(0.725).epsilon(1e-14));
  CHECK(std::fabs(init.z0[0]) <= 2 * etas[0]);
  CHECK(std::fabs(init.z0[1]) <= 2 * etas[0]);
  for (std::size_t t = 0; t < init.T0; ++t) CHECK(init.x1_chain[t + 1] == etas[t] - init.x1_chain[t]);
}

TEST_CASE("adversarial init, constant steps alternate") {
  const double eta = 0.4;
  const std::vector<double> etas(21, eta);
  const AdversarialInit init = adversarial_quadratic_init(1.0, eta / 8, etas, 20);
  CHECK(init.T0 == 20);
  for (double x : init.x1_chain) {
    CHECK(x >= 2 * init.epsilon);
    CHECK(x <= eta - 2 * init.epsilon);
  }
  for (std::size_t t = 0; t + 1 < init.x1_chain.size(); ++t) CHECK(init.x1_chain[t + 1] == eta - init.x1_chain[t]);
}

TEST_CASE("adversarial init preconditions") {
  const auto etas = geometric_etas(1.0, 0.5, 11);
  CHECK_THROWS_AS(adversarial_quadratic_init(2.0, 0.0, etas, 10), Error);
  CHECK_THROWS_AS(adversarial_quadratic_init(2.0, 0.6, etas, 10), Error);
  CHECK_THROWS_AS(adversarial_quadratic_init(2.0, 0.05, etas, 11), Error);
  CHECK_THROWS_AS(adversarial_quadratic_init(2.0, 0.05, {1.0, 2.0, 0.5}, 2), Error);
}

TEST_CASE("SignGD on the hard quadratic") {
  const std::size_t T = 2000;
  const auto etas = geometric_etas(1.0, 0.98, T + 1);
  for (double kappa : {21.0, 101.0, 401.0}) {
    CAPTURE(kappa);
    const HardQuadratic hq = build_hard_quadratic(kappa);
    const AdversarialInit init = adversarial_quadratic_init(kappa, etas[0] / kappa, etas, T);
    const QuadraticRun run = signgd_quadratic_run(hq, init, etas, T);
    CHECK(run.ties == 0);
    CHECK(run.law_violations == 0);
    CHECK(run.barrier_deviation <= 1e-12);
    const double bound = std::ceil((kappa - 1.0) / 4.0);
    CHECK((run.first_hit == kNeverHit || static_cast<double>(run.first_hit) >= bound));
    CHECK(run.z.size() == T + 1);
  }
  AdversarialInit origin;
  origin.epsilon = 0.01;
  const QuadraticRun at_zero = signgd_quadratic_run(build_hard_quadratic(5), origin, etas, 5);
  CHECK(at_zero.first_hit == 0);
}

TEST_CASE("hard MF instance") {
  const auto etas = geometric_etas(1.0 / 64.0, 0.98, 201);
  const HardMfInstance four = build_hard_mf_instance(4.0, 1.0 / 16.0, etas, 200);
  const SymEigFactors e = symmetric_eig(four.u_star);
  CHECK(e.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(e.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(max_abs_diff(four.u_star, matmul(matmul(four.quad.r, DenseMatrix::diag({2, 1})), four.quad.r.transposed())) <=
        1e-14);
  CHECK(slice_deviation(four.u0) == 0.0);
  CHECK(frobenius_norm(four.u0 - four.u_star) <= four.r0);
  const MatrixRun run = signgd_mf_run(four, 20);
  CHECK(run.slice_deviation <= 1e-14);
  CHECK(run.metric.size() == 21);

  const HardMfInstance one = build_hard_mf_instance(1.0, 1.0 / 16.0, etas, 200);
  CHECK(max_abs_diff(one.quad.h, DenseMatrix::identity(2)) == 0.0);
  CHECK(max_abs_diff(one.u_star, DenseMatrix::identity(2)) <= 1e-15);

  CHECK_THROWS_AS(build_hard_mf_instance(4.0, 1.0 / 16.0, geometric_etas(1.0, 0.98, 201), 200), Error);
}

TEST_CASE("hard MF lower bound, kappa = 41") {
  const std::size_t T = 2000;
  const double r0 = 1.0 / 16.0;
  const HardMfInstance inst = build_hard_mf_instance(41.0, r0, geometric_etas(r0 / 4.0, 0.98, T + 1), T);
  CHECK(inst.epsilon == doctest::Approx(9.0 * r0 * r0 / (4096.0 * 41.0 * 41.0)).epsilon(1e-15));
  const MatrixRun run = signgd_mf_run(inst, T);
  CHECK(run.slice_deviation <= 1e-14);
  CHECK((run.first_hit == kNeverHit || run.first_hit >= 10));
}

TEST_CASE("hard ICL instance") {
  const std::size_t T = 2000;
  const auto etas = geometric_etas(1.0, 0.98, T + 1);
  const HardIclInstance eight = build_hard_icl_instance(8.0, std::sqrt(2.0) / 8.0, etas, T);
  CHECK(eight.icl.eig_s.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(eight.icl.eig_s.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
  const SymEigFactors qi = symmetric_eig(eight.icl.s_inv);
  CHECK(qi.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(qi.eigenvalues[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(build_hard_icl_instance(1.0, 0.01, etas, T), Error);

  const HardIclInstance inst = build_hard_icl_instance(101.0, std::sqrt(2.0) * etas[0] / 101.0, etas, T);
  const MatrixRun run = signgd_icl_run(inst, T);
  CHECK(run.slice_deviation <= 1e-14);
  CHECK(run.bridge_error <= 1e-12);
  CHECK((run.first_hit == kNeverHit || run.first_hit >= 25));
}

TEST_CASE("first_hit_time") {
  CHECK(first_hit_time({0.5, 2.0}, 1.0) == 0);
  CHECK(first_hit_time({3.0, 2.0}, 1.0) == kNeverHit);
  CHECK(first_hit_time({}, 1.0) == kNeverHit);
  CHECK_THROWS_AS(first_hit_time({1.0}, 0.0), Error);
  const double lambda = 3.0, rho = 0.7;
  for (double eps : {1e-1, 1e-3, 2.5e-6}) {
    std::vector<double> m;
    for (int t = 0; t < 200; ++t) m.push_back(lambda * std::pow(rho, t));
    const auto want = static_cast<std::size_t>(std::ceil(std::log(lambda / eps) / std::log(1.0 / rho)));
    CHECK(first_hit_time(m, eps) == want);
  }
}

TEST_CASE("suite helper") {
  const CheckResult r = check_lower_bounds();
  INFO(r.detail);
  CHECK(r.pass);
}
