// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "muonlab/matrix.hpp"

namespace muonlab {

struct NewtonSchulzConfig {
  int max_iters = 64;
  double orth_tol = 1e-8;
  // Cubic iterate X <- a X + b X X^T X.
  double a = 1.5;
  double b = -0.5;
};

struct NewtonSchulzResult {
  DenseMatrix x;
  int iterations = 0;
  double residual = 0.0;  // ||X^T X - I||_F on the smaller side
  bool converged = false;
};

// U V^T over the effective rank of Z; zero for Z = 0.
DenseMatrix msign_exact(const DenseMatrix& z);

// Throws on Z = 0. Non-convergence is reported through the result flag.
NewtonSchulzResult msign_newton_schulz(const DenseMatrix& z, const NewtonSchulzConfig& cfg = {});

DenseMatrix sign_entrywise(const DenseMatrix& z);

// Entrywise sign of the diagonal; off-diagonal magnitudes above 1e-14 are rejected.
DenseMatrix dsign(const DenseMatrix& d);

inline double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

using MsignFn = std::function<DenseMatrix(const DenseMatrix&)>;

}  // namespace muonlab
