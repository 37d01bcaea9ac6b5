// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "muonlab/matrix.hpp"
#include "muonlab/problems.hpp"
#include "muonlab/random.hpp"

namespace muonlab {

// Scalar recursions that the matrix dynamics reduce to in the eigenbasis.

enum class TraceKind { MfFixedPrefactor, MfPerStepPrefactor, Icl };

struct ScalarTrace {
  TraceKind kind = TraceKind::MfFixedPrefactor;
  std::vector<double> values;  // u_t or theta_t, length T + 1
  std::vector<double> etas;    // length T
  double lambda_star = 0.0;
  double lambda_ref = 1.0;     // lambda_max (MF) or lambda_min (ICL)
  double rho = 0.5;
};

struct BoundCheck {
  bool pass = true;
  bool hypotheses_ok = true;
  double worst_margin = 0.0;  // min over steps of (bound - observed); negative on violation
  std::size_t violations = 0;
  std::string note;
};

// u_{t+1} = u_t - eta_t sign((u_t^2 - lambda*) u_t), eta_t = C sqrt(lambda_max) rho^t.
ScalarTrace scalar_muon_trajectory(double u0, double lambda_star, double lambda_max, double rho, double c_eta,
                                   std::size_t T);
// Same recursion with a fresh C_t ~ U[1, 2) per step.
ScalarTrace scalar_muon_trajectory(double u0, double lambda_star, double lambda_max, double rho,
                                   RandomStream& rng, std::size_t T);
// Fixed prefactor: ||u_{t+1}| - sqrt(l*)| <= eta_t and |u_{t+1}^2 - l*| <= 8 l_max rho^t.
// Per-step prefactor: ||u_t| - sqrt(l*)| <= 2/(1-rho) sqrt(l_max) rho^t and
// |u_t^2 - l*| <= (4/(1-rho)^2 + 4/(1-rho)) l_max rho^t.
BoundCheck check_scalar_mf_bounds(const ScalarTrace& trace);

// theta_0 = 0, theta_{t+1} = theta_t - eta_t sign(lambda* theta_t - 1), eta_t = (C / lambda_min) rho^t.
ScalarTrace scalar_icl_trajectory(double lambda_star, double lambda_min, double rho, double c_eta, std::size_t T);
// |theta_{t+1} - 1/lambda*| <= eta_t.
BoundCheck check_scalar_icl_bounds(const ScalarTrace& trace);

// Diagonal dynamics X_t = V diag(sigma_t) R^T.
struct DiagonalTrajectory {
  std::vector<std::vector<double>> sigma;  // per step, length k
  DenseMatrix v;                           // d x k, orthonormal columns
  DenseMatrix r;                           // k x k (or d x d for ICL), orthonormal
  std::vector<double> lambda_aug;          // eigenvalues padded with zeros past the rank
  std::size_t steps() const { return sigma.size(); }
  DenseMatrix iterate(std::size_t t) const;
};

// Aligned initialization U_0 = V_aug diag(sigma0) O_init^T, with V_aug
// extending the instance eigenvectors to k orthonormal columns.
struct AlignedInit {
  DenseMatrix v_aug;
  std::vector<double> sigma0;
  DenseMatrix o_init;
  DenseMatrix u0() const;
};

// Builds an MF instance whose V* is the leading r columns of a Haar basis and
// an aligned init. Nonzero modes start uniformly in (0, eta0]; modes past the
// rank start at zero_mode_start.
struct AlignedSetup {
  MfInstance instance;
  AlignedInit init;
};
AlignedSetup make_aligned_mf_setup(RandomStream& rng, std::size_t d, std::size_t r, std::size_t k, double kappa,
                                   double lambda_max, double eta0, double zero_mode_start);

// Evolves each sigma_i with its own scalar recursion, using the realized step sizes.
DiagonalTrajectory decoupled_mf_trajectory(const MfInstance& inst, const AlignedInit& init,
                                           const std::vector<double>& etas);
// Q_0 = 0, Q_t = V Theta_t V^T.
DiagonalTrajectory decoupled_icl_trajectory(const IclInstance& inst, const std::vector<double>& etas);

// max_t ||X_t^full - X_t^oracle|| in spectral norm.
double oracle_vs_full_divergence(const DiagonalTrajectory& oracle, const std::vector<DenseMatrix>& full);

}  // namespace muonlab
