// SPDX-License-Identifier: Apache-2.0
#include "muonlab/msign.hpp"

#include <cmath>

#include "muonlab/error.hpp"
#include "muonlab/linalg.hpp"

namespace muonlab {

DenseMatrix msign_exact(const DenseMatrix& z) {
  const SvdFactors f = svd(z);
  if (f.rank() == 0) return DenseMatrix(z.rows(), z.cols());
  return matmul_nt(f.left, f.right);
}

NewtonSchulzResult msign_newton_schulz(const DenseMatrix& z, const NewtonSchulzConfig& cfg) {
  if (cfg.max_iters < 1 || !(cfg.orth_tol > 0.0)) {
    throw Error(ErrorKind::Precondition, "newton-schulz: max_iters >= 1 and orth_tol > 0 required");
  }
  const double fro = frobenius_norm(z);
  if (fro == 0.0) throw Error(ErrorKind::Precondition, "newton-schulz: zero input");

  const bool tall = z.rows() >= z.cols();
  const std::size_t n = tall ? z.cols() : z.rows();
  NewtonSchulzResult res;
  res.x = (1.0 / fro) * z;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    // Gram on the smaller side; P = a I + b G.
    DenseMatrix p = tall ? matmul_tn(res.x, res.x) : matmul_nt(res.x, res.x);
    p *= cfg.b;
    for (std::size_t i = 0; i < n; ++i) p(i, i) += cfg.a;
    res.x = tall ? matmul(res.x, p) : matmul(p, res.x);
    DenseMatrix g = tall ? matmul_tn(res.x, res.x) : matmul_nt(res.x, res.x);
    for (std::size_t i = 0; i < n; ++i) g(i, i) -= 1.0;
    res.iterations = it;
    res.residual = frobenius_norm(g);
    if (!std::isfinite(res.residual)) break;
    if (res.residual <= cfg.orth_tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

DenseMatrix sign_entrywise(const DenseMatrix& z) {
  DenseMatrix s(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.size(); ++i) s.data()[i] = sign0(z.data()[i]);
  return s;
}

DenseMatrix dsign(const DenseMatrix& d) {
  DenseMatrix s(d.rows(), d.cols());
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.cols(); ++j) {
      if (i == j) {
        s(i, i) = sign0(d(i, i));
      } else if (std::fabs(d(i, j)) > 1e-14) {
        throw Error(ErrorKind::Precondition, "dsign: entry (" + std::to_string(i) + "," + std::to_string(j) +
                                                 ") is off-diagonal and nonzero");
      }
    }
  }
  return s;
}

}  // namespace muonlab
