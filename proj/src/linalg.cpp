// SPDX-License-Identifier: Apache-2.0
#include "muonlab/linalg.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <sstream>

#include "muonlab/error.hpp"
#include "muonlab/kernels.hpp"

namespace muonlab {
namespace {

struct Rotation {
  double c;
  double s;
  double t;
};

// Rotation zeroing the off-diagonal of [[app, apq], [apq, aqq]].
Rotation jacobi_rotation(double app, double aqq, double apq) {
  const double theta = (aqq - app) / (2.0 * apq);
  double t;
  if (std::fabs(theta) > 1e150) {
    t = 0.5 / theta;
  } else {
    t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
  }
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  return {c, t * c, t};
}

double off_diagonal_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

std::vector<std::size_t> descending_order(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  return idx;
}

// One-sided Jacobi on the rows of `w` (each row is one column of the matrix
// being decomposed). On return the rows are mutually orthogonal; `vt`, if
// non-null, holds the accumulated right rotation with its columns stored as rows.
void orthogonalize_rows(DenseMatrix& w, DenseMatrix* vt) {
  const std::size_t m = w.rows();
  const std::size_t len = w.cols();
  const double tol = static_cast<double>(std::max<std::size_t>(len, 1)) * DBL_EPSILON;
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < m; ++p) {
      for (std::size_t q = p + 1; q < m; ++q) {
        double* wp = w.row(p);
        double* wq = w.row(q);
        const double alpha = kernels::sumsq(wp, len);
        const double beta = kernels::sumsq(wq, len);
        if (alpha == 0.0 || beta == 0.0) continue;
        const double gamma = kernels::dot(wp, wq, len);
        if (std::fabs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        const Rotation r = jacobi_rotation(alpha, beta, gamma);
        kernels::rot(len, wp, wq, r.c, r.s);
        if (vt != nullptr) kernels::rot(vt->cols(), vt->row(p), vt->row(q), r.c, r.s);
        rotated = true;
      }
    }
    if (!rotated) return;
  }
  // Residual non-orthogonality after the sweep cap is at rounding level for
  // every input seen in practice; accept rather than fail a whole trajectory.
}

struct RawSvd {
  std::vector<double> sigma;  // unsorted, length min(d,k)
  DenseMatrix w;              // rows: sigma_i * u_i
  DenseMatrix vt;             // rows: v_i
  bool transposed = false;    // decomposition of Z^T
  double scale = 0.0;
};

RawSvd raw_svd(const DenseMatrix& z, bool want_vectors) {
  if (!z.all_finite()) throw Error(ErrorKind::Numerical, "svd input has non-finite entries");
  RawSvd out;
  out.scale = max_abs(z);
  const std::size_t d = z.rows();
  const std::size_t k = z.cols();
  out.transposed = d < k;
  const std::size_t m = std::min(d, k);
  if (out.scale == 0.0 || m == 0) {
    out.sigma.assign(m, 0.0);
    return out;
  }
  // Rows of w are the columns of whichever orientation has fewer columns.
  out.w = out.transposed ? z : z.transposed();
  out.w *= 1.0 / out.scale;
  if (want_vectors) out.vt = DenseMatrix::identity(m);
  orthogonalize_rows(out.w, want_vectors ? &out.vt : nullptr);
  out.sigma.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.sigma[i] = std::sqrt(kernels::sumsq(out.w.row(i), out.w.cols()));
  return out;
}

}  // namespace

SymEigFactors symmetric_eig(const DenseMatrix& a, const JacobiOptions& opts) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::Precondition, "symmetric_eig: matrix is " + std::to_string(a.rows()) + "x" +
                                             std::to_string(a.cols()) + ", not square");
  }
  if (!a.all_finite()) throw Error(ErrorKind::Precondition, "symmetric_eig: non-finite entries");
  const double norm = frobenius_norm(a);
  const double asym = asymmetry(a);
  if (asym > 1e-12 * norm) {
    std::ostringstream os;
    os << "symmetric_eig: input not symmetric (max |a_ij - a_ji| = " << asym << ", ||A||_F = " << norm << ")";
    throw Error(ErrorKind::Precondition, os.str());
  }
  const std::size_t n = a.rows();
  DenseMatrix w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w(i, j) = 0.5 * (a(i, j) + a(j, i));
  DenseMatrix vt = DenseMatrix::identity(n);

  int sweep = 0;
  double off = off_diagonal_norm(w);
  while (off > opts.tol * norm) {
    if (sweep == opts.max_sweeps) {
      std::ostringstream os;
      os << "symmetric_eig: no convergence after " << sweep << " sweeps (off-diagonal norm " << off << ")";
      throw Error(ErrorKind::Convergence, os.str());
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = w(p, q);
        if (apq == 0.0) continue;
        const double app = w(p, p);
        const double aqq = w(q, q);
        const Rotation r = jacobi_rotation(app, aqq, apq);
        kernels::rot(n, w.row(p), w.row(q), r.c, r.s);
        w(p, p) = app - r.t * apq;
        w(q, q) = aqq + r.t * apq;
        w(p, q) = 0.0;
        w(q, p) = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == p || j == q) continue;
          w(j, p) = w(p, j);
          w(j, q) = w(q, j);
        }
        kernels::rot(n, vt.row(p), vt.row(q), r.c, r.s);
      }
    }
    ++sweep;
    off = off_diagonal_norm(w);
  }

  std::vector<double> ev = w.diagonal();
  const auto order = descending_order(ev);
  SymEigFactors f;
  f.sweeps = sweep;
  f.eigenvalues.resize(n);
  f.eigenvectors = DenseMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    f.eigenvalues[j] = ev[order[j]];
    const double* v = vt.row(order[j]);
    for (std::size_t i = 0; i < n; ++i) f.eigenvectors(i, j) = v[i];
  }
  return f;
}

DenseMatrix reconstruct(const SymEigFactors& f) {
  return scaled_outer(f.eigenvectors, f.eigenvalues, f.eigenvectors);
}

DenseMatrix spectral_apply(const SymEigFactors& f, const std::function<double(double)>& fn) {
  std::vector<double> mapped(f.eigenvalues.size());
  std::transform(f.eigenvalues.begin(), f.eigenvalues.end(), mapped.begin(), fn);
  return scaled_outer(f.eigenvectors, mapped, f.eigenvectors);
}

SvdFactors svd(const DenseMatrix& z) {
  if (z.rows() == 0 || z.cols() == 0) throw Error(ErrorKind::Precondition, "svd: empty matrix");
  RawSvd raw = raw_svd(z, true);
  SvdFactors f;
  const std::size_t m = raw.sigma.size();
  const auto order = descending_order(raw.sigma);
  const double s1 = m ? raw.sigma[order[0]] : 0.0;
  std::size_t rank = 0;
  while (rank < m && s1 > 0.0 && raw.sigma[order[rank]] > kRankTol * s1) ++rank;

  const std::size_t len = raw.transposed ? z.cols() : z.rows();  // length of the orthogonalized vectors
  DenseMatrix long_side(len, rank);                                // normalized w rows
  DenseMatrix short_side(m, rank);                                 // columns of V
  f.singular_values.resize(rank);
  for (std::size_t j = 0; j < rank; ++j) {
    const std::size_t src = order[j];
    const double s = raw.sigma[src];
    f.singular_values[j] = s * raw.scale;
    const double* wr = raw.w.row(src);
    for (std::size_t i = 0; i < len; ++i) long_side(i, j) = wr[i] / s;
    const double* vr = raw.vt.row(src);
    for (std::size_t i = 0; i < m; ++i) short_side(i, j) = vr[i];
  }
  if (raw.transposed) {
    f.left = std::move(short_side);
    f.right = std::move(long_side);
  } else {
    f.left = std::move(long_side);
    f.right = std::move(short_side);
  }
  return f;
}

std::vector<double> singular_values(const DenseMatrix& z) {
  RawSvd raw = raw_svd(z, false);
  std::vector<double> s = raw.sigma;
  for (double& v : s) v *= raw.scale;
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

QrFactors qr_householder(const DenseMatrix& g) {
  const std::size_t d = g.rows();
  const std::size_t k = g.cols();
  if (d < k) {
    throw Error(ErrorKind::Precondition,
                "qr_householder: needs rows >= cols, got " + std::to_string(d) + "x" + std::to_string(k));
  }
  if (!g.all_finite()) throw Error(ErrorKind::Precondition, "qr_householder: non-finite entries");
  DenseMatrix a = g;
  std::vector<std::vector<double>> reflectors(k);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> v(d - j);
    for (std::size_t i = j; i < d; ++i) v[i - j] = a(i, j);
    const double norm = std::sqrt(kernels::sumsq(v.data(), v.size()));
    if (norm == 0.0) continue;
    const double alpha = v[0] >= 0.0 ? -norm : norm;
    v[0] -= alpha;
    const double vv = kernels::sumsq(v.data(), v.size());
    if (vv == 0.0) continue;
    for (std::size_t c = j; c < k; ++c) {
      double dotp = 0.0;
      for (std::size_t i = j; i < d; ++i) dotp += v[i - j] * a(i, c);
      const double f = 2.0 * dotp / vv;
      for (std::size_t i = j; i < d; ++i) a(i, c) -= f * v[i - j];
    }
    reflectors[j] = std::move(v);
  }
  QrFactors out;
  out.r = DenseMatrix(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) out.r(i, j) = a(i, j);
  // Q = H_0 H_1 ... H_{k-1} applied to the first k columns of I.
  out.q = DenseMatrix(d, k);
  for (std::size_t i = 0; i < k; ++i) out.q(i, i) = 1.0;
  for (std::size_t jj = k; jj-- > 0;) {
    const auto& v = reflectors[jj];
    if (v.empty()) continue;
    const double vv = kernels::sumsq(v.data(), v.size());
    for (std::size_t c = 0; c < k; ++c) {
      double dotp = 0.0;
      for (std::size_t i = jj; i < d; ++i) dotp += v[i - jj] * out.q(i, c);
      const double f = 2.0 * dotp / vv;
      for (std::size_t i = jj; i < d; ++i) out.q(i, c) -= f * v[i - jj];
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (out.r(j, j) < 0.0) {
      for (std::size_t c = j; c < k; ++c) out.r(j, c) = -out.r(j, c);
      for (std::size_t i = 0; i < d; ++i) out.q(i, j) = -out.q(i, j);
    }
  }
  return out;
}

double spectral_norm(const DenseMatrix& z) {
  if (z.empty()) return 0.0;
  return singular_values(z).front();
}

double condition_number(const DenseMatrix& a, std::size_t rank) {
  if (rank == 0 || rank > a.rows()) {
    throw Error(ErrorKind::Precondition, "condition_number: rank " + std::to_string(rank) + " out of range");
  }
  const SymEigFactors f = symmetric_eig(a);
  const double l1 = f.eigenvalues.front();
  const double lmin = f.eigenvalues.back();
  if (l1 <= 0.0 || lmin < -1e-10 * l1) {
    throw Error(ErrorKind::Precondition, "condition_number: matrix is not positive semidefinite");
  }
  const double lr = f.eigenvalues[rank - 1];
  if (lr <= kRankTol * l1) {
    std::ostringstream os;
    os << "condition_number: lambda_" << rank << " = " << lr << " is below " << kRankTol << " * lambda_1";
    throw Error(ErrorKind::RankDeficient, os.str());
  }
  return l1 / lr;
}

}  // namespace muonlab
