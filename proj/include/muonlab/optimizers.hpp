// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "muonlab/matrix.hpp"
#include "muonlab/msign.hpp"
#include "muonlab/problems.hpp"
#include "muonlab/random.hpp"

namespace muonlab {

enum class Algorithm { Muon, GD, SignGD, ScaledGD };
enum class MsignBackend { Exact, NewtonSchulz };
enum class PrefactorMode { FixedOnce, PerIteration };

const char* to_string(Algorithm a);

// Step-size schedules. Exponential: eta_t = C * base_scale * rho^t with C
// drawn from [c_lo, c_hi) once (FixedOnce) or per call (PerIteration);
// c_lo == c_hi pins C without consuming randomness. Plateau: eta is
// multiplied by `decay` once the loss has failed to improve on its best value
// for `patience` consecutive calls, and the stall counter restarts. A loss only
// counts as an improvement if it is below best * (1 - threshold); otherwise an
// iterate cycling with a slowly creeping best loss would never trigger a decay.
class Schedule {
 public:
  enum class Kind { Exponential, Plateau, Constant };

  static Schedule exponential(double rho, double base_scale, PrefactorMode mode, double c_lo = 1.0,
                              double c_hi = 2.0);
  static Schedule plateau(double initial_eta, double decay = 0.3, int patience = 50, double threshold = 1e-4);
  static Schedule constant(double eta);

  double eta(std::size_t t, double current_loss, RandomStream& rng);

  Kind kind() const { return kind_; }
  double rho() const { return rho_; }
  double base_scale() const { return base_; }
  PrefactorMode prefactor_mode() const { return mode_; }
  // Prefactor used by the most recent exponential call.
  double last_prefactor() const { return c_; }
  int stall_counter() const { return stall_; }

 private:
  Kind kind_ = Kind::Constant;
  double rho_ = 1.0;
  double base_ = 0.0;
  PrefactorMode mode_ = PrefactorMode::FixedOnce;
  double c_lo_ = 1.0, c_hi_ = 1.0;
  double c_ = 1.0;
  bool c_drawn_ = false;
  double decay_ = 0.3;
  int patience_ = 50;
  double threshold_ = 1e-4;
  double best_loss_ = std::numeric_limits<double>::infinity();
  int stall_ = 0;
};

struct MuonState {
  DenseMatrix buffer;  // zero-initialized on first use
  double mu = 0.0;
};

struct StepInfo {
  bool msign_converged = true;
  bool zero_direction = false;
  int ns_iterations = 0;
};

struct AlgoConfig {
  Algorithm algorithm = Algorithm::Muon;
  double mu = 0.0;
  MsignBackend backend = MsignBackend::Exact;
  NewtonSchulzConfig ns;
};

// B' = grad + mu B, X' = X - eta msign(B').
DenseMatrix muon_step(const DenseMatrix& x, const DenseMatrix& grad, MuonState& state, double eta,
                      MsignBackend backend = MsignBackend::Exact, const NewtonSchulzConfig& ns = {},
                      StepInfo* info = nullptr);
DenseMatrix gd_step(const DenseMatrix& x, const DenseMatrix& grad, double eta);
DenseMatrix signgd_step(const DenseMatrix& x, const DenseMatrix& grad, double eta);
// U' = U - eta grad (U^T U)^{-1}; throws when the Gram matrix is singular.
DenseMatrix scaledgd_step(const DenseMatrix& u, const DenseMatrix& grad, double eta);

struct TrajectoryRecord {
  std::size_t t = 0;
  double eta = 0.0;  // step size applied to this row's iterate
  double loss = 0.0;
  double spectral_error = 0.0;
  double grad_sigma_min = -1.0;  // -1 when not computed
  bool msign_converged = true;
};

struct TrajectoryOptions {
  std::size_t sigma_min_max_dim = 64;  // grad sigma_min only when d <= this
  double stop_error = -1.0;             // stop once spectral_error <= stop_error (disabled if <= 0)
  bool keep_iterates = false;
};

struct TrajectoryResult {
  std::vector<TrajectoryRecord> records;  // rows t = 0..T (fewer on early stop or abort)
  std::vector<DenseMatrix> iterates;      // only with keep_iterates
  DenseMatrix final_iterate;
  bool aborted = false;
  std::string diagnostic;
};

TrajectoryResult run_trajectory(const ProblemInstance& problem, const AlgoConfig& algo, Schedule& sched,
                                const DenseMatrix& init, std::size_t T, RandomStream& rng,
                                const TrajectoryOptions& opts = {});

}  // namespace muonlab
