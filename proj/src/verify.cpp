// SPDX-License-Identifier: Apache-2.0
#include "muonlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "muonlab/error.hpp"
#include "muonlab/linalg.hpp"
#include "muonlab/lower_bounds.hpp"
#include "muonlab/oracle.hpp"
#include "muonlab/problems.hpp"
#include "muonlab/random.hpp"

namespace muonlab {
namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

double gram_defect(const DenseMatrix& y) {
  const bool tall = y.rows() >= y.cols();
  const DenseMatrix g = tall ? matmul_tn(y, y) : matmul_nt(y, y);
  return max_abs_diff(g, DenseMatrix::identity(g.rows()));
}

double min_eigenvalue(const DenseMatrix& a) {
  DenseMatrix s = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) s(i, j) = s(j, i) = 0.5 * (a(i, j) + a(j, i));
  return symmetric_eig(s).eigenvalues.back();
}

// Simplified Muon with a caller-supplied msign, recording every iterate.
std::vector<DenseMatrix> simplified_muon(const ProblemInstance& p, const MsignFn& msign, DenseMatrix x,
                                         const std::vector<double>& etas) {
  std::vector<DenseMatrix> out;
  out.reserve(etas.size() + 1);
  out.push_back(x);
  for (double eta : etas) {
    const DenseMatrix g = loss_grad(p, x).grad;
    x -= eta * msign(g);
    out.push_back(x);
  }
  return out;
}

double directional_fd_error(const std::function<double(const DenseMatrix&)>& f, const DenseMatrix& x,
                            const DenseMatrix& grad) {
  DenseMatrix fd(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::fabs(x.data()[i]));
    DenseMatrix xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    fd.data()[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  const double scale = frobenius_norm(grad);
  return frobenius_norm(fd - grad) / (scale > 0.0 ? scale : 1.0);
}

}  // namespace

CheckResult check_msign_properties(const MsignFn& msign, std::size_t n_matrices, std::size_t max_rows,
                                   std::size_t max_cols, std::uint64_t seed, double tol) {
  double worst_orth = 0, worst_idem = 0, worst_scale = 0, worst_polar = 0;
  std::size_t failures = 0;
  std::string first_failure;
  for (std::size_t i = 0; i < n_matrices; ++i) {
    RandomStream rng(seed, derive_stream_id({0x6d7369676eULL, i}));
    const std::size_t m = 1 + rng.index(max_rows), n = 1 + rng.index(max_cols);
    const DenseMatrix z = gaussian_matrix(rng, m, n);
    const double c = std::exp(rng.uniform(-7.0, 7.0));
    try {
      const DenseMatrix y = msign(z);
      if (y.rows() != m || y.cols() != n) throw Error(ErrorKind::Shape, "msign changed the shape");
      const double orth = gram_defect(y);
      const double idem = max_abs_diff(msign(y), y);
      const double scale = max_abs_diff(msign(c * z), y);
      const DenseMatrix p = matmul_tn(y, z);
      const double zn = frobenius_norm(z);
      const double polar = std::max(asymmetry(p), -min_eigenvalue(p)) / zn;
      worst_orth = std::max(worst_orth, orth);
      worst_idem = std::max(worst_idem, idem);
      worst_scale = std::max(worst_scale, scale);
      worst_polar = std::max(worst_polar, polar);
      if (!(orth <= tol && idem <= tol && scale <= tol && polar <= tol)) {
        if (failures++ == 0) first_failure = std::to_string(m) + "x" + std::to_string(n);
      }
    } catch (const std::exception& e) {
      if (failures++ == 0) first_failure = std::to_string(m) + "x" + std::to_string(n) + " threw: " + e.what();
    }
  }
  std::ostringstream os;
  os << n_matrices << " matrices, worst orth=" << num(worst_orth) << " idem=" << num(worst_idem)
     << " scale=" << num(worst_scale) << " polar=" << num(worst_polar) << " (tol " << num(tol) << ")";
  if (failures) os << ", " << failures << " failing, first " << first_failure;
  return {failures == 0, os.str()};
}

CheckResult check_newton_schulz_agreement(std::size_t n_seeds, std::size_t max_rows, std::size_t max_cols,
                                          double min_ratio, std::uint64_t seed, double tol) {
  double worst = 0.0;
  int max_iters = 0;
  std::size_t failures = 0;
  for (std::size_t s = 0; s < n_seeds; ++s) {
    RandomStream rng(seed, derive_stream_id({0x4e53ULL, s}));
    const std::size_t m = 1 + rng.index(max_rows), n = 1 + rng.index(max_cols);
    const std::size_t p = std::min(m, n);
    const DenseMatrix u = haar_orthonormal(rng, m, p);
    const DenseMatrix v = haar_orthonormal(rng, n, p);
    const double top = std::exp(rng.uniform(-5.0, 5.0));
    std::vector<double> sigma(p);
    for (std::size_t i = 0; i < p; ++i) sigma[i] = top * std::pow(min_ratio, rng.uniform01());
    sigma[0] = top;
    if (p > 1) sigma[p - 1] = top * min_ratio;
    const DenseMatrix z = scaled_outer(u, sigma, v);
    const DenseMatrix reference = matmul_nt(u, v);  // exact polar factor of z by construction
    const NewtonSchulzResult ns = msign_newton_schulz(z);
    const double gap_ns = spectral_norm(ns.x - reference);
    const double gap_exact = spectral_norm(msign_exact(z) - reference);
    worst = std::max(worst, std::max(gap_ns, gap_exact));
    max_iters = std::max(max_iters, ns.iterations);
    if (!(ns.converged && gap_ns <= tol && gap_exact <= tol)) ++failures;
  }
  std::ostringstream os;
  os << n_seeds << " seeds, ratio >= " << num(min_ratio) << ", worst gap=" << num(worst) << " (tol " << num(tol)
     << "), max iterations=" << max_iters;
  if (failures) os << ", " << failures << " failing";
  return {failures == 0, os.str()};
}

CheckResult check_decoupling(const MsignFn& msign, std::size_t d, std::size_t r, std::size_t T,
                             std::uint64_t seed, double tol) {
  std::ostringstream os;
  bool pass = true;
  try {
    for (std::size_t k : {r, std::min(r + 3, d), d}) {
      RandomStream rng(seed, derive_stream_id({0x6d66ULL, d, r, k}));
      const double c = rng.uniform(1.0, 2.0);
      const double lambda_max = 1.0;
      const std::vector<double> etas = geometric_etas(c * std::sqrt(lambda_max), 0.5, T);
      // Modes past the rank start at eta_0 / 2, reach 0 exactly at t = 2 and stay there.
      const AlignedSetup s = make_aligned_mf_setup(rng, d, r, k, 25.0, lambda_max, etas[0], 0.5 * etas[0]);
      const auto full = simplified_muon(s.instance, msign, s.init.u0(), etas);
      const double gap = oracle_vs_full_divergence(decoupled_mf_trajectory(s.instance, s.init, etas), full);
      os << "mf k=" << k << " gap=" << num(gap) << "; ";
      pass = pass && gap <= tol;
    }
    RandomStream rng(seed, derive_stream_id({0x69636cULL, d}));
    const IclInstance inst = make_icl_instance(rng, d, 5.0, 1.0);
    const double c = rng.uniform(1.0, 2.0);
    const std::vector<double> etas = geometric_etas(c / inst.sigma_min(), 0.5, T);
    const auto full = simplified_muon(inst, msign, DenseMatrix(d, d), etas);
    const double gap = oracle_vs_full_divergence(decoupled_icl_trajectory(inst, etas), full);
    os << "icl gap=" << num(gap) << " (d=" << d << ", T=" << T << ", tol " << num(tol) << ")";
    pass = pass && gap <= tol;
  } catch (const std::exception& e) {
    os << "threw: " << e.what();
    pass = false;
  }
  return {pass, os.str()};
}

CheckResult check_lemma_suites(const LemmaCounts& n, std::uint64_t seed) {
  std::size_t viol_fixed = 0, viol_icl = 0, viol_step = 0, zeros = 0, bad_hyp = 0;
  double margin_fixed = INFINITY, margin_icl = INFINITY, margin_step = INFINITY;
  auto log_uniform = [](RandomStream& rng, double lo, double hi) {
    return std::exp(rng.uniform(std::log(lo), std::log(hi)));
  };
  for (std::size_t i = 0; i < n.fixed_traces; ++i) {
    RandomStream rng(seed, derive_stream_id({0x4c3432ULL, i}));
    const double lmax = log_uniform(rng, 0.1, 10.0);
    const double lstar = i % 10 == 0 ? 0.0 : lmax * rng.uniform01();
    const double c = rng.uniform(1.0, 2.0);
    const double eta0 = c * std::sqrt(lmax);
    const double u0 = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * eta0 * (1.0 - rng.uniform01());
    const BoundCheck b = check_scalar_mf_bounds(scalar_muon_trajectory(u0, lstar, lmax, 0.5, c, n.steps));
    viol_fixed += b.violations;
    bad_hyp += b.hypotheses_ok ? 0 : 1;
    margin_fixed = std::min(margin_fixed, b.worst_margin);
  }
  for (std::size_t i = 0; i < n.icl_traces; ++i) {
    RandomStream rng(seed, derive_stream_id({0x4c3532ULL, i}));
    const double lmin = log_uniform(rng, 0.1, 10.0);
    const double lstar = i % 10 == 0 ? lmin : lmin * log_uniform(rng, 1.0, 100.0);
    const double c = rng.uniform(1.0, 2.0);
    const BoundCheck b = check_scalar_icl_bounds(scalar_icl_trajectory(lstar, lmin, 0.5, c, n.steps));
    viol_icl += b.violations;
    bad_hyp += b.hypotheses_ok ? 0 : 1;
    margin_icl = std::min(margin_icl, b.worst_margin);
  }
  for (std::size_t i = 0; i < n.per_step_traces; ++i) {
    RandomStream rng(seed, derive_stream_id({0x4c4235ULL, i}));
    const double lmax = log_uniform(rng, 0.1, 10.0);
    const double lstar = i % 10 == 0 ? 0.0 : lmax * rng.uniform01();
    const double rho = rng.uniform(2.0 / 3.0, 0.95);
    // |u0| <= sqrt(lambda_max) keeps |u0| <= eta_0 for every prefactor draw.
    const double u0 = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * std::sqrt(lmax) * (1.0 - rng.uniform01());
    const BoundCheck b = check_scalar_mf_bounds(scalar_muon_trajectory(u0, lstar, lmax, rho, rng, n.steps));
    viol_step += b.violations;
    bad_hyp += b.hypotheses_ok ? 0 : 1;
    margin_step = std::min(margin_step, b.worst_margin);
  }
  for (std::size_t i = 0; i < n.nonzero_traces; ++i) {
    RandomStream rng(seed, derive_stream_id({0x4c3431ULL, i}));
    const double lmax = log_uniform(rng, 0.1, 10.0);
    const double lstar = lmax * rng.uniform01();
    const double c = rng.uniform(1.0, 2.0);
    const double eta0 = c * std::sqrt(lmax);
    double u0 = 0.0;
    while (u0 == 0.0) u0 = rng.uniform(-eta0, eta0);
    const ScalarTrace tr = scalar_muon_trajectory(u0, lstar, lmax, 0.5, c, n.steps);
    zeros += static_cast<std::size_t>(std::count(tr.values.begin(), tr.values.end(), 0.0));
  }
  std::ostringstream os;
  os << "fixed-prefactor " << n.fixed_traces << " traces: " << viol_fixed << " violations (worst margin "
     << num(margin_fixed) << "); icl " << n.icl_traces << ": " << viol_icl << " (worst margin " << num(margin_icl)
     << "); per-step prefactor " << n.per_step_traces << ": " << viol_step << " (worst margin " << num(margin_step)
     << "); exact zeros in " << n.nonzero_traces << "x" << n.steps << ": " << zeros;
  if (bad_hyp) os << "; hypothesis failures: " << bad_hyp;
  return {viol_fixed + viol_icl + viol_step + zeros + bad_hyp == 0, os.str()};
}

CheckResult check_lower_bounds() {
  std::ostringstream os;
  bool pass = true;
  const std::size_t T = 2000;
  auto hit_text = [](std::size_t h) { return h == kNeverHit ? std::string("inf") : std::to_string(h); };
  try {
    const std::vector<double> etas = geometric_etas(1.0, 0.98, T + 1);
    for (double kappa : {21.0, 101.0, 401.0}) {
      const HardQuadratic hq = build_hard_quadratic(kappa);
      const AdversarialInit init = adversarial_quadratic_init(kappa, etas[0] / kappa, etas, T);
      const QuadraticRun run = signgd_quadratic_run(hq, init, etas, T);
      const bool ok = (run.first_hit == kNeverHit || 4.0 * static_cast<double>(run.first_hit) >= kappa - 1.0) &&
                      run.ties == 0 && run.law_violations == 0 && run.barrier_deviation <= 1e-12;
      os << "quadratic kappa=" << kappa << " first_hit=" << hit_text(run.first_hit) << (ok ? "" : " FAILED") << "; ";
      pass = pass && ok;
    }
    {
      const double kappa = 101.0;
      const HardIclInstance inst = build_hard_icl_instance(kappa, std::sqrt(2.0) * etas[0] / kappa, etas, T);
      const MatrixRun run = signgd_icl_run(inst, T);
      const bool ok = (run.first_hit == kNeverHit || run.first_hit >= 25) && run.slice_deviation <= 1e-14 &&
                      run.bridge_error <= 1e-12;
      os << "icl kappa=101 first_hit=" << hit_text(run.first_hit) << (ok ? "" : " FAILED") << "; ";
      pass = pass && ok;
    }
    {
      const double kappa = 41.0, r0 = 1.0 / 16.0;
      const HardMfInstance inst = build_hard_mf_instance(kappa, r0, geometric_etas(r0 / 4.0, 0.98, T + 1), T);
      const MatrixRun run = signgd_mf_run(inst, T);
      const bool ok = (run.first_hit == kNeverHit || run.first_hit >= 10) && run.slice_deviation <= 1e-14;
      os << "mf kappa=41 first_hit=" << hit_text(run.first_hit) << (ok ? "" : " FAILED");
      pass = pass && ok;
    }
  } catch (const std::exception& e) {
    os << "threw: " << e.what();
    pass = false;
  }
  return {pass, os.str()};
}

CheckResult check_gradients(std::size_t n_points, std::size_t max_d, std::uint64_t seed, double tol) {
  double worst_mf = 0.0, worst_icl = 0.0;
  for (std::size_t i = 0; i < n_points; ++i) {
    RandomStream rng(seed, derive_stream_id({0x67726164ULL, i}));
    const std::size_t d = 2 + rng.index(max_d - 1);
    const std::size_t r = 1 + rng.index(d);
    const std::size_t k = r + rng.index(d - r + 1);
    const MfInstance mf = make_mf_instance(rng, d, r, k, std::exp(rng.uniform(0.0, std::log(100.0))), 1.0);
    const DenseMatrix u = 0.7 * gaussian_matrix(rng, d, k);
    worst_mf = std::max(worst_mf, directional_fd_error([&](const DenseMatrix& x) { return mf_loss_grad(mf, x).loss; },
                                                       u, mf_loss_grad(mf, u).grad));
    const IclInstance icl = make_icl_instance(rng, d, rng.uniform(1.0, 5.0), rng.uniform(0.5, 1.5));
    const DenseMatrix q = 0.5 * gaussian_matrix(rng, d, d);
    worst_icl = std::max(worst_icl, directional_fd_error(
                                        [&](const DenseMatrix& x) { return icl_loss_grad(icl, x).loss; }, q,
                                        icl_loss_grad(icl, q).grad));
  }
  std::ostringstream os;
  os << n_points << " points, d <= " << max_d << ": worst relative error mf=" << num(worst_mf)
     << " icl=" << num(worst_icl) << " (tol " << num(tol) << ")";
  return {worst_mf <= tol && worst_icl <= tol, os.str()};
}

CheckResult check_monte_carlo(std::size_t n_q, std::size_t n_tasks, std::size_t d, std::uint64_t seed,
                              double z_max) {
  RandomStream rng(seed, derive_stream_id({0x6d63ULL, d}));
  IclInstance inst = make_icl_instance(rng, d, 3.0, 1.0);
  attach_samples(inst, rng);
  double worst_z = 0.0;
  for (std::size_t i = 0; i < n_q; ++i) {
    const DenseMatrix q = inst.s_inv + 0.5 * gaussian_matrix(rng, d, d);
    const double closed = icl_loss_grad(inst, q).loss;
    const MonteCarloEstimate est = icl_monte_carlo_loss(inst, q, rng, n_tasks);
    worst_z = std::max(worst_z, std::fabs(est.mean - closed) / est.standard_error);
  }
  std::ostringstream os;
  os << n_q << " matrices, n=" << n_tasks << ", d=" << d << ": worst |mc - closed| / se = " << num(worst_z)
     << " (limit " << num(z_max) << ")";
  return {worst_z <= z_max, os.str()};
}

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = {"msign", "oracle", "lemmas", "lowerbounds", "gradients", "montecarlo"};
  return names;
}

bool run_verify(const std::string& suite, std::ostream& out, const VerifyOptions& opts) {
  const auto& names = verify_suite_names();
  if (suite != "all" && std::find(names.begin(), names.end(), suite) == names.end()) {
    throw Error(ErrorKind::Config, "unknown verify suite '" + suite + "'");
  }
  const MsignFn msign = opts.msign ? opts.msign : MsignFn(msign_exact);
  bool all_ok = true;
  for (const std::string& name : names) {
    if (suite != "all" && suite != name) continue;
    CheckResult r;
    if (name == "msign") {
      r = check_msign_properties(msign, 200, 32, 16, opts.seed);
      if (r.pass) {
        const CheckResult ns = check_newton_schulz_agreement(100, 32, 16, 1e-3, opts.seed);
        r = {ns.pass, r.detail + "; newton-schulz: " + ns.detail};
      }
    } else if (name == "oracle") {
      r = check_decoupling(msign, 20, 5, 100, opts.seed);
    } else if (name == "lemmas") {
      r = check_lemma_suites(LemmaCounts{}, opts.seed);
    } else if (name == "lowerbounds") {
      r = check_lower_bounds();
    } else if (name == "gradients") {
      r = check_gradients(50, 10, opts.seed);
    } else {
      r = check_monte_carlo(10, 100000, 5, opts.seed);
    }
    out << "SUITE " << name << (r.pass ? " PASS " : " FAIL ") << r.detail << "\n";
    all_ok = all_ok && r.pass;
  }
  return all_ok;
}

}  // namespace muonlab
