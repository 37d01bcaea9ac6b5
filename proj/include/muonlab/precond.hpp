// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "muonlab/config.hpp"
#include "muonlab/matrix.hpp"
#include "muonlab/random.hpp"

namespace muonlab {

// Per-step k x k blocks of the two Kronecker-structured preconditioners
// I (x) P acting on vec(U): P_muon = (G^T G)^{1/2}, P_scaledgd = U^T U.
struct PreconditionerReport {
  std::vector<std::size_t> steps;
  std::vector<DenseMatrix> p_muon;
  std::vector<DenseMatrix> p_scaledgd;
  std::vector<double> normalized_difference;  // ||P_muon/tr - P_scaledgd/tr||_F
  std::vector<double> psd_defect;             // max over both blocks of asymmetry and negative eigenvalue, relative
};

// Symmetric PSD square root via the eigendecomposition, negative rounding clipped.
DenseMatrix psd_sqrt(const DenseMatrix& a);

// Relative PSD defect: max(asymmetry, -lambda_min) / ||A||_F (0 for the zero matrix).
double psd_defect(const DenseMatrix& a);

// Muon (exact msign, mu = 0) on an MF instance with d, r, k = cfg.k.front(),
// alpha, kappa = cfg.kappa.front() and cfg's schedule; blocks at cfg.steps.
PreconditionerReport preconditioner_report(const ExperimentConfig& cfg);

// Writes heatmaps and a report CSV under cfg.out; returns the file names.
std::vector<std::string> write_preconditioner_report(const ExperimentConfig& cfg, const PreconditionerReport& rep);

// max | (I_d (x) P) vec_r(G) - vec_r(G P) | for a random d x k G and PSD P.
double kronecker_identity_gap(RandomStream& rng, std::size_t d, std::size_t k);

}  // namespace muonlab
