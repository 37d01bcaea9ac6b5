// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "muonlab/linalg.hpp"
#include "muonlab/matrix.hpp"
#include "muonlab/random.hpp"

namespace muonlab {

// Symmetric matrix factorization: f(U) = 1/4 ||U U^T - M*||_F^2, U is d x k.
struct MfInstance {
  std::size_t d = 0, r = 0, k = 0;
  std::vector<double> eigenvalues;  // r values, descending, positive
  DenseMatrix eigenvectors;         // d x r
  DenseMatrix target;               // M*
  double kappa = 1.0;
  double lambda_max() const { return eigenvalues.front(); }
};

// Linear-attention ICL quadratic: f(Q) = 1/2 tr((SQ - I) S (SQ - I)^T).
struct IclInstance {
  std::size_t d = 0;
  DenseMatrix s;
  SymEigFactors eig_s;
  double kappa_s = 1.0;
  double kappa_eff = 1.0;  // kappa_s^3
  DenseMatrix s_inv;
  DenseMatrix s_half;
  // Optional prompt inputs, one per row; (1/N) sum x_i x_i^T = S.
  DenseMatrix samples;
  bool has_samples() const { return !samples.empty(); }
  double sigma_min() const { return eig_s.eigenvalues.back(); }
  double sigma_max() const { return eig_s.eigenvalues.front(); }
};

using ProblemInstance = std::variant<MfInstance, IclInstance>;

struct LossGrad {
  double loss = 0.0;
  DenseMatrix grad;
};

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Eigenvalues log-uniform from lambda_max down to lambda_max / kappa, V* Haar.
MfInstance make_mf_instance(RandomStream& rng, std::size_t d, std::size_t r, std::size_t k, double kappa,
                            double lambda_max);
// M* = V diag(eigenvalues) V^T for a given orthonormal V (d x r).
MfInstance mf_instance_from(const DenseMatrix& v, const std::vector<double>& eigenvalues, std::size_t k);
LossGrad mf_loss_grad(const MfInstance& inst, const DenseMatrix& u);
double mf_spectral_error(const MfInstance& inst, const DenseMatrix& u);

// Eigenvalues log-uniform from kappa_s * sigma_min down to sigma_min, V Haar.
IclInstance make_icl_instance(RandomStream& rng, std::size_t d, double kappa_s, double sigma_min);
IclInstance icl_instance_from(const DenseMatrix& s);
// S = V diag(eigenvalues) V^T with the factors taken as given (eigenvalues descending).
IclInstance icl_instance_from_eig(const DenseMatrix& v, const std::vector<double>& eigenvalues);
// N = d samples x_i = sqrt(d) S^{1/2} q_i over a Haar basis {q_i}.
void attach_samples(IclInstance& inst, RandomStream& rng);
LossGrad icl_loss_grad(const IclInstance& inst, const DenseMatrix& q);
double icl_spectral_error(const IclInstance& inst, const DenseMatrix& q);
// Mean of 1/2 (w^T S Q x_q - w^T x_q)^2 over w ~ N(0, I), x_q uniform over the samples.
MonteCarloEstimate icl_monte_carlo_loss(const IclInstance& inst, const DenseMatrix& q, RandomStream& rng,
                                        std::size_t n_tasks);

LossGrad loss_grad(const ProblemInstance& p, const DenseMatrix& x);
double spectral_error(const ProblemInstance& p, const DenseMatrix& x);
std::size_t iterate_rows(const ProblemInstance& p);
std::size_t iterate_cols(const ProblemInstance& p);

std::vector<double> log_uniform_spectrum(double top, double kappa, std::size_t n);

}  // namespace muonlab
