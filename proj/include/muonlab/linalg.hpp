// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "muonlab/matrix.hpp"

namespace muonlab {

// Relative threshold below which a singular value counts as zero.
inline constexpr double kRankTol = 1e-12;

struct SymEigFactors {
  std::vector<double> eigenvalues;  // descending
  DenseMatrix eigenvectors;         // columns, orthonormal
  int sweeps = 0;
};

struct SvdFactors {
  DenseMatrix left;                    // d x r'
  std::vector<double> singular_values;  // r' values, descending, > kRankTol * sigma_1
  DenseMatrix right;                   // k x r'
  std::size_t rank() const { return singular_values.size(); }
};

struct QrFactors {
  DenseMatrix q;  // d x k, orthonormal columns
  DenseMatrix r;  // k x k, upper triangular with nonnegative diagonal
};

struct JacobiOptions {
  double tol = 1e-14;  // off-diagonal Frobenius mass relative to ||A||_F
  int max_sweeps = 100;
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymEigFactors symmetric_eig(const DenseMatrix& a, const JacobiOptions& opts = {});
DenseMatrix reconstruct(const SymEigFactors& f);
// V f(lambda) V^T
DenseMatrix spectral_apply(const SymEigFactors& f, const std::function<double(double)>& fn);

// Compact SVD by one-sided Jacobi; components below kRankTol * sigma_1 are dropped.
SvdFactors svd(const DenseMatrix& z);
// All min(d, k) singular values, descending, zeros kept.
std::vector<double> singular_values(const DenseMatrix& z);

QrFactors qr_householder(const DenseMatrix& g);

double spectral_norm(const DenseMatrix& z);
// lambda_1 / lambda_rank of a symmetric PSD matrix.
double condition_number(const DenseMatrix& a, std::size_t rank);

}  // namespace muonlab
