// SPDX-License-Identifier: Apache-2.0
#include "muonlab/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "muonlab/error.hpp"
#include "muonlab/kernels.hpp"

namespace muonlab {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorKind::Shape, "data length " + std::to_string(data_.size()) + " != " +
                                      std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  if (!all_finite()) throw Error(ErrorKind::Numerical, "non-finite entry in matrix data");
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorKind::Shape, "ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  if (!all_finite()) throw Error(ErrorKind::Numerical, "non-finite entry in matrix data");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diag(const std::vector<double>& d) {
  DenseMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

DenseMatrix DenseMatrix::column(const std::vector<double>& v) {
  return DenseMatrix(v.size(), 1, v);
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

std::vector<double> DenseMatrix::col(std::size_t j) const {
  std::vector<double> c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

std::vector<double> DenseMatrix::diagonal() const {
  std::vector<double> d(std::min(rows_, cols_));
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*this)(i, i);
  return d;
}

DenseMatrix DenseMatrix::leading_cols(std::size_t n) const {
  if (n > cols_) throw Error(ErrorKind::Shape, "leading_cols beyond column count");
  DenseMatrix m(rows_, n);
  for (std::size_t i = 0; i < rows_; ++i) std::copy_n(row(i), n, m.row(i));
  return m;
}

bool DenseMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& o) {
  require_same_shape(*this, o, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& o) {
  require_same_shape(*this, o, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator*=(double a) {
  for (double& v : data_) v *= a;
  return *this;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorKind::Shape, "matmul inner dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i);
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double aip = a(i, p);
      if (aip != 0.0) kernels::axpy(n, aip, b.row(p), ci);
    }
  }
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorKind::Shape, "matmul_tn row mismatch");
  DenseMatrix c(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t p = 0; p < a.rows(); ++p) {
    const double* ap = a.row(p);
    const double* bp = b.row(p);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      if (ap[i] != 0.0) kernels::axpy(n, ap[i], bp, c.row(i));
    }
  }
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw Error(ErrorKind::Shape, "matmul_nt column mismatch");
  DenseMatrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = kernels::dot(a.row(i), b.row(j), a.cols());
  return c;
}

DenseMatrix scaled_outer(const DenseMatrix& a, const std::vector<double>& d, const DenseMatrix& b) {
  if (a.cols() != d.size() || b.cols() != d.size())
    throw Error(ErrorKind::Shape, "scaled_outer factor mismatch");
  DenseMatrix ad = a;
  for (std::size_t i = 0; i < ad.rows(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) ad(i, j) *= d[j];
  return matmul_nt(ad, b);
}

double frobenius_norm(const DenseMatrix& a) {
  // Scaled accumulation so tiny iterates (alpha ~ 1e-10 and below) do not underflow.
  const double m = max_abs(a);
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double v : a.values()) {
    const double r = v / m;
    s += r * r;
  }
  return m * std::sqrt(s);
}

double max_abs(const DenseMatrix& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::fabs(v));
  return m;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
  return m;
}

double asymmetry(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::Shape, "asymmetry of non-square matrix");
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) m = std::max(m, std::fabs(a(i, j) - a(j, i)));
  return m;
}

bool same_shape(const DenseMatrix& a, const DenseMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* what) {
  if (!same_shape(a, b)) {
    throw Error(ErrorKind::Shape, std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                                      std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                      "x" + std::to_string(b.cols()));
  }
}

}  // namespace muonlab
