// SPDX-License-Identifier: Apache-2.0
#include "muonlab/optimizers.hpp"

#include <cmath>
#include <sstream>

#include "muonlab/error.hpp"
#include "muonlab/linalg.hpp"

namespace muonlab {

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Muon: return "muon";
    case Algorithm::GD: return "gd";
    case Algorithm::SignGD: return "signgd";
    case Algorithm::ScaledGD: return "scaledgd";
  }
  return "?";
}

Schedule Schedule::exponential(double rho, double base_scale, PrefactorMode mode, double c_lo, double c_hi) {
  if (!(rho >= 0.5 && rho < 1.0)) throw Error(ErrorKind::Precondition, "exponential schedule: rho must lie in [1/2, 1)");
  if (!(base_scale > 0.0)) throw Error(ErrorKind::Precondition, "exponential schedule: base_scale must be positive");
  if (!(c_lo > 0.0 && c_lo <= c_hi)) throw Error(ErrorKind::Precondition, "exponential schedule: need 0 < c_lo <= c_hi");
  Schedule s;
  s.kind_ = Kind::Exponential;
  s.rho_ = rho;
  s.base_ = base_scale;
  s.mode_ = mode;
  s.c_lo_ = c_lo;
  s.c_hi_ = c_hi;
  s.c_ = c_lo;
  return s;
}

Schedule Schedule::plateau(double initial_eta, double decay, int patience, double threshold) {
  if (!(initial_eta > 0.0)) throw Error(ErrorKind::Precondition, "plateau schedule: initial eta must be positive");
  if (!(decay > 0.0 && decay < 1.0) || patience < 1) {
    throw Error(ErrorKind::Precondition, "plateau schedule: need 0 < decay < 1 and patience >= 1");
  }
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw Error(ErrorKind::Precondition, "plateau schedule: threshold must lie in [0, 1)");
  }
  Schedule s;
  s.kind_ = Kind::Plateau;
  s.base_ = initial_eta;
  s.decay_ = decay;
  s.patience_ = patience;
  s.threshold_ = threshold;
  return s;
}

Schedule Schedule::constant(double eta) {
  if (!(eta >= 0.0)) throw Error(ErrorKind::Precondition, "constant schedule: eta must be nonnegative");
  Schedule s;
  s.kind_ = Kind::Constant;
  s.base_ = eta;
  return s;
}

double Schedule::eta(std::size_t t, double current_loss, RandomStream& rng) {
  switch (kind_) {
    case Kind::Constant:
      return base_;
    case Kind::Exponential: {
      const bool draw = mode_ == PrefactorMode::PerIteration || !c_drawn_;
      if (draw) {
        c_ = c_lo_ < c_hi_ ? rng.uniform(c_lo_, c_hi_) : c_lo_;
        c_drawn_ = true;
      }
      return c_ * base_ * std::pow(rho_, static_cast<double>(t));
    }
    case Kind::Plateau:
      if (current_loss < best_loss_ * (1.0 - threshold_)) {
        best_loss_ = current_loss;
        stall_ = 0;
      } else if (++stall_ >= patience_) {
        base_ *= decay_;
        stall_ = 0;
      }
      return base_;
  }
  return base_;
}

DenseMatrix muon_step(const DenseMatrix& x, const DenseMatrix& grad, MuonState& state, double eta,
                      MsignBackend backend, const NewtonSchulzConfig& ns, StepInfo* info) {
  require_same_shape(x, grad, "muon_step");
  if (state.buffer.empty()) state.buffer = DenseMatrix(grad.rows(), grad.cols());
  require_same_shape(state.buffer, grad, "muon_step momentum buffer");
  if (state.mu == 0.0) {
    state.buffer = grad;
  } else {
    state.buffer *= state.mu;
    state.buffer += grad;
  }
  StepInfo local;
  DenseMatrix dir;
  if (frobenius_norm(state.buffer) == 0.0) {
    local.zero_direction = true;
    dir = DenseMatrix(x.rows(), x.cols());
  } else if (backend == MsignBackend::Exact) {
    dir = msign_exact(state.buffer);
  } else {
    NewtonSchulzResult r = msign_newton_schulz(state.buffer, ns);
    local.msign_converged = r.converged;
    local.ns_iterations = r.iterations;
    dir = std::move(r.x);
  }
  if (info != nullptr) *info = local;
  DenseMatrix out = x;
  if (!local.zero_direction) out -= eta * dir;
  return out;
}

DenseMatrix gd_step(const DenseMatrix& x, const DenseMatrix& grad, double eta) {
  require_same_shape(x, grad, "gd_step");
  return x - eta * grad;
}

DenseMatrix signgd_step(const DenseMatrix& x, const DenseMatrix& grad, double eta) {
  require_same_shape(x, grad, "signgd_step");
  return x - eta * sign_entrywise(grad);
}

DenseMatrix scaledgd_step(const DenseMatrix& u, const DenseMatrix& grad, double eta) {
  require_same_shape(u, grad, "scaledgd_step");
  const SymEigFactors g = symmetric_eig(matmul_tn(u, u));
  const double top = g.eigenvalues.front();
  const double bottom = g.eigenvalues.back();
  // sigma_min(U) > 1e-12 sigma_max(U)  <=>  lambda_min > 1e-24 lambda_max
  if (!(top > 0.0) || bottom <= 1e-24 * top) {
    std::ostringstream os;
    os << "scaledgd_step: U^T U is singular (lambda_min = " << bottom << ", lambda_max = " << top << ")";
    throw Error(ErrorKind::RankDeficient, os.str());
  }
  const DenseMatrix inv = spectral_apply(g, [](double l) { return 1.0 / l; });
  return u - eta * matmul(grad, inv);
}

TrajectoryResult run_trajectory(const ProblemInstance& problem, const AlgoConfig& algo, Schedule& sched,
                                const DenseMatrix& init, std::size_t T, RandomStream& rng,
                                const TrajectoryOptions& opts) {
  if (init.rows() != iterate_rows(problem) || init.cols() != iterate_cols(problem)) {
    throw Error(ErrorKind::Shape, "run_trajectory: initial iterate has the wrong shape");
  }
  if (T < 1) throw Error(ErrorKind::Precondition, "run_trajectory: T must be >= 1");
  TrajectoryResult res;
  res.records.reserve(T + 1);
  MuonState state;
  state.mu = algo.mu;
  DenseMatrix x = init;
  const bool want_sigma = iterate_rows(problem) <= opts.sigma_min_max_dim;
  for (std::size_t t = 0; t <= T; ++t) {
    LossGrad lg = loss_grad(problem, x);
    if (!std::isfinite(lg.loss) || !lg.grad.all_finite()) {
      std::ostringstream os;
      os << "non-finite loss at t=" << t << " (" << to_string(algo.algorithm) << ", max |X| = " << max_abs(x)
         << ", last finite loss = " << (res.records.empty() ? NAN : res.records.back().loss) << ")";
      res.aborted = true;
      res.diagnostic = os.str();
      break;
    }
    TrajectoryRecord rec;
    rec.t = t;
    rec.loss = lg.loss;
    rec.spectral_error = spectral_error(problem, x);
    if (want_sigma) rec.grad_sigma_min = singular_values(lg.grad).back();
    rec.eta = sched.eta(t, lg.loss, rng);
    if (opts.keep_iterates) res.iterates.push_back(x);
    const bool stop = t == T || (opts.stop_error > 0.0 && rec.spectral_error <= opts.stop_error);
    if (!stop) {
      switch (algo.algorithm) {
        case Algorithm::Muon: {
          StepInfo info;
          x = muon_step(x, lg.grad, state, rec.eta, algo.backend, algo.ns, &info);
          rec.msign_converged = info.msign_converged;
          break;
        }
        case Algorithm::GD: x = gd_step(x, lg.grad, rec.eta); break;
        case Algorithm::SignGD: x = signgd_step(x, lg.grad, rec.eta); break;
        case Algorithm::ScaledGD: x = scaledgd_step(x, lg.grad, rec.eta); break;
      }
    }
    res.records.push_back(rec);
    if (stop) break;
  }
  res.final_iterate = std::move(x);
  return res;
}

}  // namespace muonlab
