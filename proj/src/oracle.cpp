// SPDX-License-Identifier: Apache-2.0
#include "muonlab/oracle.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <functional>
#include <sstream>

#include "muonlab/error.hpp"
#include "muonlab/linalg.hpp"
#include "muonlab/msign.hpp"

namespace muonlab {
namespace {

double mf_direction(double u, double lambda) { return sign0(u * u - lambda) * sign0(u); }

// Rounding allowance for evaluating a bound on computed iterates: the
// recursion itself rounds once per step, so the allowance grows with t.
double slack(std::size_t t, double scale) { return 16.0 * DBL_EPSILON * static_cast<double>(t + 1) * scale; }

void record(BoundCheck& c, double bound, double observed, double allowance) {
  const double margin = bound - observed;
  if (c.violations == 0 && c.worst_margin == 0.0 && c.note.empty()) c.worst_margin = margin;
  c.worst_margin = std::min(c.worst_margin, margin);
  if (margin < -allowance) {
    ++c.violations;
    c.pass = false;
  }
}

void note_hypothesis(BoundCheck& c, const std::string& what) {
  c.hypotheses_ok = false;
  if (!c.note.empty()) c.note += "; ";
  c.note += what;
}

ScalarTrace run_mf(double u0, double lambda_star, double lambda_max, double rho, std::size_t T,
                   const std::function<double(std::size_t)>& eta_at, TraceKind kind) {
  if (u0 == 0.0) throw Error(ErrorKind::Precondition, "scalar_muon_trajectory: u0 must be nonzero");
  if (!(lambda_star >= 0.0 && lambda_star <= lambda_max)) {
    throw Error(ErrorKind::Precondition, "scalar_muon_trajectory: need 0 <= lambda* <= lambda_max");
  }
  ScalarTrace tr;
  tr.kind = kind;
  tr.lambda_star = lambda_star;
  tr.lambda_ref = lambda_max;
  tr.rho = rho;
  tr.values.reserve(T + 1);
  tr.etas.reserve(T);
  tr.values.push_back(u0);
  for (std::size_t t = 0; t < T; ++t) {
    const double eta = eta_at(t);
    const double u = tr.values.back();
    tr.etas.push_back(eta);
    tr.values.push_back(u - eta * mf_direction(u, lambda_star));
  }
  return tr;
}

}  // namespace

ScalarTrace scalar_muon_trajectory(double u0, double lambda_star, double lambda_max, double rho, double c_eta,
                                   std::size_t T) {
  if (!(rho >= 0.5 && rho < 1.0)) throw Error(ErrorKind::Precondition, "scalar_muon_trajectory: rho must lie in [1/2, 1)");
  const double scale = c_eta * std::sqrt(lambda_max);
  return run_mf(u0, lambda_star, lambda_max, rho, T,
                [&](std::size_t t) { return scale * std::pow(rho, static_cast<double>(t)); },
                TraceKind::MfFixedPrefactor);
}

ScalarTrace scalar_muon_trajectory(double u0, double lambda_star, double lambda_max, double rho,
                                   RandomStream& rng, std::size_t T) {
  if (!(rho >= 0.5 && rho < 1.0)) throw Error(ErrorKind::Precondition, "scalar_muon_trajectory: rho must lie in [1/2, 1)");
  const double root = std::sqrt(lambda_max);
  return run_mf(u0, lambda_star, lambda_max, rho, T,
                [&](std::size_t t) { return rng.uniform(1.0, 2.0) * root * std::pow(rho, static_cast<double>(t)); },
                TraceKind::MfPerStepPrefactor);
}

BoundCheck check_scalar_mf_bounds(const ScalarTrace& tr) {
  BoundCheck c;
  if (tr.kind == TraceKind::Icl) throw Error(ErrorKind::Precondition, "check_scalar_mf_bounds: ICL trace");
  if (tr.values.size() != tr.etas.size() + 1) throw Error(ErrorKind::Shape, "check_scalar_mf_bounds: ragged trace");
  const double lmax = tr.lambda_ref;
  const double root_max = std::sqrt(lmax);
  const double root = std::sqrt(tr.lambda_star);
  const double rho = tr.rho;
  if (tr.values.front() == 0.0 || (!tr.etas.empty() && std::fabs(tr.values.front()) > tr.etas.front())) {
    note_hypothesis(c, "need 0 < |u0| <= eta0");
  }
  if (tr.lambda_star < 0.0 || tr.lambda_star > lmax) note_hypothesis(c, "need 0 <= lambda* <= lambda_max");
  for (std::size_t t = 0; t < tr.etas.size(); ++t) {
    const double ct = tr.etas[t] / (root_max * std::pow(rho, static_cast<double>(t)));
    // eta_t <= 2 sqrt(lambda_max) rho^t is part of both statements, so C is capped at 2.
    if (ct < 1.0 - 1e-12 || ct > 2.0 + 1e-12) {
      note_hypothesis(c, "prefactor outside [1, 2] at t=" + std::to_string(t));
      break;
    }
  }
  if (tr.kind == TraceKind::MfFixedPrefactor) {
    if (!(rho >= 0.5 && rho < 1.0)) note_hypothesis(c, "need rho in [1/2, 1)");
    for (std::size_t t = 0; t < tr.etas.size(); ++t) {
      const double u = tr.values[t + 1];
      const double scale = std::fabs(u) + root + tr.etas[t];
      record(c, tr.etas[t], std::fabs(std::fabs(u) - root), slack(t, scale));
      record(c, 8.0 * lmax * std::pow(rho, static_cast<double>(t)), std::fabs(u * u - tr.lambda_star),
             slack(t, scale * scale));
    }
  } else {
    if (!(rho >= 2.0 / 3.0 && rho < 1.0)) note_hypothesis(c, "need rho in [2/3, 1)");
    const double a = 2.0 / (1.0 - rho);
    const double b = 4.0 / ((1.0 - rho) * (1.0 - rho)) + 4.0 / (1.0 - rho);
    for (std::size_t t = 0; t < tr.values.size(); ++t) {
      const double u = tr.values[t];
      const double rt = std::pow(rho, static_cast<double>(t));
      const double scale = std::fabs(u) + root + root_max;
      record(c, a * root_max * rt, std::fabs(std::fabs(u) - root), slack(t, scale));
      record(c, b * lmax * rt, std::fabs(u * u - tr.lambda_star), slack(t, scale * scale));
    }
  }
  return c;
}

ScalarTrace scalar_icl_trajectory(double lambda_star, double lambda_min, double rho, double c_eta, std::size_t T) {
  if (!(lambda_min > 0.0 && lambda_star >= lambda_min)) {
    throw Error(ErrorKind::Precondition, "scalar_icl_trajectory: need lambda* >= lambda_min > 0");
  }
  ScalarTrace tr;
  tr.kind = TraceKind::Icl;
  tr.lambda_star = lambda_star;
  tr.lambda_ref = lambda_min;
  tr.rho = rho;
  tr.values.push_back(0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const double eta = c_eta / lambda_min * std::pow(rho, static_cast<double>(t));
    const double th = tr.values.back();
    tr.etas.push_back(eta);
    tr.values.push_back(th - eta * sign0(lambda_star * th - 1.0));
  }
  return tr;
}

BoundCheck check_scalar_icl_bounds(const ScalarTrace& tr) {
  BoundCheck c;
  if (tr.kind != TraceKind::Icl) throw Error(ErrorKind::Precondition, "check_scalar_icl_bounds: not an ICL trace");
  if (tr.values.empty() || tr.values.front() != 0.0) note_hypothesis(c, "need theta_0 = 0");
  if (!(tr.rho >= 0.5 && tr.rho < 1.0)) note_hypothesis(c, "need rho in [1/2, 1)");
  if (!tr.etas.empty() && tr.etas.front() * tr.lambda_ref < 1.0 - 1e-12) note_hypothesis(c, "need C_eta >= 1");
  const double target = 1.0 / tr.lambda_star;
  for (std::size_t t = 0; t < tr.etas.size(); ++t) {
    const double th = tr.values[t + 1];
    record(c, tr.etas[t], std::fabs(th - target), slack(t, std::fabs(th) + target + tr.etas[t]));
  }
  return c;
}

DenseMatrix DiagonalTrajectory::iterate(std::size_t t) const { return scaled_outer(v, sigma.at(t), r); }

DenseMatrix AlignedInit::u0() const { return scaled_outer(v_aug, sigma0, o_init); }

AlignedSetup make_aligned_mf_setup(RandomStream& rng, std::size_t d, std::size_t r, std::size_t k, double kappa,
                                   double lambda_max, double eta0, double zero_mode_start) {
  if (!(r >= 1 && r <= k && k <= d)) throw Error(ErrorKind::Precondition, "aligned setup: need 1 <= r <= k <= d");
  if (!(eta0 > 0.0)) throw Error(ErrorKind::Precondition, "aligned setup: eta0 must be positive");
  const DenseMatrix w = haar_orthonormal(rng, d, d);
  AlignedSetup s;
  s.instance = mf_instance_from(w.leading_cols(r), log_uniform_spectrum(lambda_max, kappa, r), k);
  s.init.v_aug = w.leading_cols(k);
  s.init.o_init = haar_orthonormal(rng, k, k);
  s.init.sigma0.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    s.init.sigma0[i] = i < r ? eta0 * (1.0 - rng.uniform01()) : zero_mode_start;
  }
  return s;
}

DiagonalTrajectory decoupled_mf_trajectory(const MfInstance& inst, const AlignedInit& init,
                                           const std::vector<double>& etas) {
  const std::size_t k = init.sigma0.size();
  if (k != inst.k || init.v_aug.cols() != k || init.o_init.cols() != k) {
    throw Error(ErrorKind::Shape, "decoupled_mf_trajectory: aligned init does not match the instance");
  }
  DiagonalTrajectory out;
  out.v = init.v_aug;
  out.r = init.o_init;
  out.lambda_aug.assign(k, 0.0);
  std::copy(inst.eigenvalues.begin(), inst.eigenvalues.end(), out.lambda_aug.begin());
  out.sigma.reserve(etas.size() + 1);
  out.sigma.push_back(init.sigma0);
  for (double eta : etas) {
    std::vector<double> next = out.sigma.back();
    for (std::size_t i = 0; i < k; ++i) next[i] -= eta * mf_direction(next[i], out.lambda_aug[i]);
    out.sigma.push_back(std::move(next));
  }
  return out;
}

DiagonalTrajectory decoupled_icl_trajectory(const IclInstance& inst, const std::vector<double>& etas) {
  DiagonalTrajectory out;
  out.v = inst.eig_s.eigenvectors;
  out.r = inst.eig_s.eigenvectors;
  out.lambda_aug = inst.eig_s.eigenvalues;
  out.sigma.reserve(etas.size() + 1);
  out.sigma.emplace_back(inst.d, 0.0);
  for (double eta : etas) {
    std::vector<double> next = out.sigma.back();
    for (std::size_t i = 0; i < inst.d; ++i) next[i] -= eta * sign0(out.lambda_aug[i] * next[i] - 1.0);
    out.sigma.push_back(std::move(next));
  }
  return out;
}

double oracle_vs_full_divergence(const DiagonalTrajectory& oracle, const std::vector<DenseMatrix>& full) {
  if (oracle.steps() != full.size()) {
    std::ostringstream os;
    os << "oracle_vs_full_divergence: oracle has " << oracle.steps() << " steps, full trajectory " << full.size();
    throw Error(ErrorKind::Shape, os.str());
  }
  double gap = 0.0;
  for (std::size_t t = 0; t < full.size(); ++t) gap = std::max(gap, spectral_norm(full[t] - oracle.iterate(t)));
  return gap;
}

}  // namespace muonlab
