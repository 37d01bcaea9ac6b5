// SPDX-License-Identifier: Apache-2.0
#include "muonlab/lower_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "muonlab/error.hpp"
#include "muonlab/linalg.hpp"
#include "muonlab/msign.hpp"
#include "muonlab/optimizers.hpp"

namespace muonlab {
namespace {

const double kSqrt2 = std::sqrt(2.0);

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorKind::Precondition, msg);
}

void check_etas(const std::vector<double>& etas, std::size_t T, const char* who) {
  require(etas.size() >= T + 1, std::string(who) + ": need at least T + 1 step sizes");
  for (std::size_t t = 0; t < etas.size(); ++t) {
    require(etas[t] > 0.0 && std::isfinite(etas[t]), std::string(who) + ": step sizes must be positive");
    require(t == 0 || etas[t] <= etas[t - 1], std::string(who) + ": step sizes must be non-increasing");
  }
}

DenseMatrix circulant(double p, double q) { return DenseMatrix{{p, q}, {q, p}}; }

}  // namespace

HardQuadratic build_hard_quadratic(double kappa) {
  require(kappa >= 1.0 && std::isfinite(kappa), "build_hard_quadratic: kappa must be >= 1");
  HardQuadratic hq;
  hq.kappa = kappa;
  hq.h = DenseMatrix{{0.5 * (kappa + 1.0), 0.5 * (kappa - 1.0)}, {0.5 * (kappa - 1.0), 0.5 * (kappa + 1.0)}};
  const double c = 1.0 / kSqrt2;
  hq.r = DenseMatrix{{c, -c}, {c, c}};

  const DenseMatrix rotated = matmul_tn(hq.r, matmul(hq.h, hq.r));
  const DenseMatrix expected = DenseMatrix::diag({kappa, 1.0});
  if (max_abs_diff(rotated, expected) > 1e-12 * kappa) {
    throw Error(ErrorKind::Numerical, "build_hard_quadratic: R^T H R is not diag(kappa, 1)");
  }
  const SymEigFactors eig = symmetric_eig(hq.h);
  if (std::fabs(eig.eigenvalues[0] - kappa) > 1e-12 * kappa || std::fabs(eig.eigenvalues[1] - 1.0) > 1e-12 * kappa) {
    throw Error(ErrorKind::Numerical, "build_hard_quadratic: eigenvalues of H are not (kappa, 1)");
  }
  return hq;
}

Vec2 rotate(const HardQuadratic& hq, const Vec2& zt) {
  return {hq.r(0, 0) * zt[0] + hq.r(0, 1) * zt[1], hq.r(1, 0) * zt[0] + hq.r(1, 1) * zt[1]};
}

Vec2 unrotate(const HardQuadratic& hq, const Vec2& z) {
  return {hq.r(0, 0) * z[0] + hq.r(1, 0) * z[1], hq.r(0, 1) * z[0] + hq.r(1, 1) * z[1]};
}

AdversarialInit adversarial_quadratic_init(double kappa, double epsilon, const std::vector<double>& etas,
                                           std::size_t T) {
  require(kappa >= 1.0, "adversarial_quadratic_init: kappa must be >= 1");
  require(epsilon > 0.0, "adversarial_quadratic_init: epsilon must be positive");
  check_etas(etas, T, "adversarial_quadratic_init");
  require(epsilon <= etas[0] / kappa, "adversarial_quadratic_init: need epsilon <= eta_0 / kappa");
  require(etas[0] >= 4.0 * epsilon, "adversarial_quadratic_init: no step with eta_t >= 4 epsilon");

  AdversarialInit init;
  init.epsilon = epsilon;
  std::size_t t0 = 0;
  while (t0 + 1 <= T && etas[t0 + 1] >= 4.0 * epsilon) ++t0;
  init.T0 = t0;
  init.x1_chain.assign(t0 + 1, 0.0);
  init.x1_chain[t0] = 0.5 * etas[t0];
  for (std::size_t t = t0; t-- > 0;) init.x1_chain[t] = etas[t] - init.x1_chain[t + 1];
  for (std::size_t t = 0; t <= t0; ++t) {
    const double x = init.x1_chain[t];
    const double slack = 1e-12 * etas[0];
    if (x < 2.0 * epsilon - slack || x > etas[t] - 2.0 * epsilon + slack) {
      std::ostringstream os;
      os << "adversarial_quadratic_init: chain leaves [2 eps, eta_t - 2 eps] at t=" << t;
      throw Error(ErrorKind::Numerical, os.str());
    }
  }
  init.x0 = {init.x1_chain[0], kappa * epsilon};
  const HardQuadratic hq = build_hard_quadratic(kappa);
  init.z0 = rotate(hq, {kSqrt2 * init.x0[0], kSqrt2 * init.x0[1]});
  return init;
}

QuadraticRun signgd_quadratic_run(const HardQuadratic& hq, const AdversarialInit& init,
                                  const std::vector<double>& etas, std::size_t T) {
  require(etas.size() >= T, "signgd_quadratic_run: need T step sizes");
  QuadraticRun run;
  run.z.reserve(T + 1);
  Vec2 z = init.z0;
  const double pinned = kSqrt2 * hq.kappa * init.epsilon;
  for (std::size_t t = 0;; ++t) {
    run.z.push_back(z);
    const double norm = std::hypot(z[0], z[1]);
    if (run.first_hit == kNeverHit && norm <= init.epsilon) run.first_hit = t;
    const Vec2 zt = unrotate(hq, z);
    if (t <= init.T0) run.barrier_deviation = std::max(run.barrier_deviation, std::fabs(zt[1] - pinned));
    if (t == T) break;

    const double eta = etas[t];
    const Vec2 hz = {hq.h(0, 0) * z[0] + hq.h(0, 1) * z[1], hq.h(1, 0) * z[0] + hq.h(1, 1) * z[1]};
    const Vec2 s = {sign0(hz[0]), sign0(hz[1])};
    z = {z[0] - eta * s[0], z[1] - eta * s[1]};
    if (norm == 0.0) continue;

    if (s[0] == 0.0 || s[1] == 0.0) {
      ++run.ties;
      std::ostringstream os;
      os << "tie at t=" << t << ": |kappa zt1| = |zt2| = " << std::fabs(zt[1]);
      run.events.push_back(os.str());
      continue;
    }
    // Equal signs move only zt1, opposite signs only zt2, each by sqrt2 eta.
    const bool first_moves = std::fabs(hq.kappa * zt[0]) > std::fabs(zt[1]);
    const Vec2 nt = unrotate(hq, z);
    const double tol = 1e-12 * (1.0 + std::fabs(zt[0]) + std::fabs(zt[1]));
    const std::size_t moved = first_moves ? 0 : 1;
    const std::size_t fixed = 1 - moved;
    const bool law_ok = (s[0] == s[1]) == first_moves &&
                        std::fabs(std::fabs(nt[moved] - zt[moved]) - kSqrt2 * eta) <= tol &&
                        std::fabs(nt[fixed] - zt[fixed]) <= tol;
    if (!law_ok) {
      ++run.law_violations;
      std::ostringstream os;
      os << "switching law violated at t=" << t;
      run.events.push_back(os.str());
    }
  }
  return run;
}

HardMfInstance build_hard_mf_instance(double kappa, double r0, const std::vector<double>& etas, std::size_t T) {
  require(kappa >= 1.0, "build_hard_mf_instance: kappa must be >= 1");
  require(r0 > 0.0, "build_hard_mf_instance: r0 must be positive");
  check_etas(etas, T, "build_hard_mf_instance");
  require(etas[0] <= r0, "build_hard_mf_instance: need eta_0 <= r0");

  HardMfInstance inst;
  inst.quad = build_hard_quadratic(kappa);
  inst.r0 = r0;
  inst.etas = etas;
  inst.epsilon = 9.0 * r0 * r0 / (4096.0 * kappa * kappa);
  inst.u_star = spectral_apply(symmetric_eig(inst.quad.h), [](double l) { return std::sqrt(std::max(l, 0.0)); });

  // A SignGD step moves one rotated diagonal entry of U by 2 eta_t, so the
  // barrier runs in x = delta / sqrt2 against steps sqrt2 eta_t.
  std::vector<double> scaled(etas.size());
  for (std::size_t t = 0; t < etas.size(); ++t) scaled[t] = kSqrt2 * etas[t];
  const double eps_q = 4.0 / 3.0 * std::sqrt(inst.epsilon);
  inst.init = adversarial_quadratic_init(kappa, eps_q, scaled, T);
  inst.delta0 = {kSqrt2 * inst.init.x0[0], kSqrt2 * inst.init.x0[1]};

  const std::vector<double> diag = {std::sqrt(kappa) + inst.delta0[0], 1.0 + inst.delta0[1]};
  const DenseMatrix u0 = scaled_outer(inst.quad.r, diag, inst.quad.r);
  // Enforce the slice exactly; the rounding difference is at the 1e-16 level.
  inst.u0 = circulant(0.5 * (u0(0, 0) + u0(1, 1)), 0.5 * (u0(0, 1) + u0(1, 0)));

  if (std::hypot(inst.delta0[0], inst.delta0[1]) > r0) {
    throw Error(ErrorKind::Numerical, "build_hard_mf_instance: initial distance exceeds r0");
  }
  if (frobenius_norm(inst.u0 - inst.u_star) > r0 * (1.0 + 1e-12)) {
    throw Error(ErrorKind::Numerical, "build_hard_mf_instance: ||U0 - U*||_F exceeds r0");
  }
  return inst;
}

MatrixRun signgd_mf_run(const HardMfInstance& inst, std::size_t T) {
  require(inst.etas.size() >= T, "signgd_mf_run: need T step sizes");
  MatrixRun run;
  DenseMatrix u = inst.u0;
  for (std::size_t t = 0;; ++t) {
    DenseMatrix e = matmul_nt(u, u);
    e -= inst.quad.h;
    const double f = 0.25 * frobenius_norm(e) * frobenius_norm(e);
    run.metric.push_back(f);
    run.slice_deviation = std::max(run.slice_deviation, slice_deviation(u));
    if (t == T) break;
    u = signgd_step(u, matmul(e, u), inst.etas[t]);
  }
  run.first_hit = first_hit_time(run.metric, inst.epsilon);
  return run;
}

HardIclInstance build_hard_icl_instance(double kappa, double epsilon, const std::vector<double>& etas,
                                        std::size_t T) {
  require(kappa >= 2.0, "build_hard_icl_instance: kappa must be >= 2");
  require(epsilon > 0.0, "build_hard_icl_instance: epsilon must be positive");
  HardIclInstance inst;
  inst.quad = build_hard_quadratic(kappa);
  inst.epsilon = epsilon;
  inst.etas = etas;
  const double top = std::cbrt(kappa);
  inst.icl = icl_instance_from_eig(inst.quad.r, {top, 1.0});
  inst.a_star = 0.5 * (1.0 / top + 1.0);
  inst.b_star = 0.5 * (1.0 / top - 1.0);
  inst.init = adversarial_quadratic_init(kappa, epsilon / kSqrt2, etas, T);
  inst.q0 = circulant(inst.a_star + inst.init.z0[0], inst.b_star + inst.init.z0[1]);
  return inst;
}

MatrixRun signgd_icl_run(const HardIclInstance& inst, std::size_t T) {
  require(inst.etas.size() >= T, "signgd_icl_run: need T step sizes");
  MatrixRun run;
  const DenseMatrix q_star = circulant(inst.a_star, inst.b_star);
  DenseMatrix q = inst.q0;
  for (std::size_t t = 0;; ++t) {
    const double dist = frobenius_norm(q - q_star);
    const double za = 0.5 * (q(0, 0) + q(1, 1)) - inst.a_star;
    const double zb = 0.5 * (q(0, 1) + q(1, 0)) - inst.b_star;
    run.metric.push_back(dist);
    run.bridge_error = std::max(run.bridge_error, std::fabs(dist - kSqrt2 * std::hypot(za, zb)));
    run.slice_deviation = std::max(run.slice_deviation, slice_deviation(q));
    if (t == T) break;
    q = signgd_step(q, icl_loss_grad(inst.icl, q).grad, inst.etas[t]);
  }
  run.first_hit = first_hit_time(run.metric, inst.epsilon);
  return run;
}

double slice_deviation(const DenseMatrix& m) {
  if (m.rows() != 2 || m.cols() != 2) throw Error(ErrorKind::Shape, "slice_deviation: expected a 2x2 matrix");
  return std::max(std::fabs(m(0, 0) - m(1, 1)), std::fabs(m(0, 1) - m(1, 0)));
}

std::size_t first_hit_time(const std::vector<double>& metric, double epsilon) {
  require(epsilon > 0.0, "first_hit_time: epsilon must be positive");
  for (std::size_t t = 0; t < metric.size(); ++t)
    if (metric[t] <= epsilon) return t;
  return kNeverHit;
}

std::vector<double> geometric_etas(double eta0, double rho, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = eta0 * std::pow(rho, static_cast<double>(t));
  return out;
}

}  // namespace muonlab
