// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace muonlab {

// Row-major dense matrix of doubles. A 0x0 matrix is allowed only as the
// empty factor of a rank-zero decomposition.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  // Throws on size mismatch or non-finite entries.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diag(const std::vector<double>& d);
  static DenseMatrix column(const std::vector<double>& v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }
  const std::vector<double>& values() const { return data_; }

  DenseMatrix transposed() const;
  std::vector<double> col(std::size_t j) const;
  std::vector<double> diagonal() const;
  // First `n` columns.
  DenseMatrix leading_cols(std::size_t n) const;

  bool all_finite() const;

  DenseMatrix& operator+=(const DenseMatrix& o);
  DenseMatrix& operator-=(const DenseMatrix& o);
  DenseMatrix& operator*=(double a);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(double s, DenseMatrix a);

// A*B, A^T*B, A*B^T.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
// A * diag(d) * B^T
DenseMatrix scaled_outer(const DenseMatrix& a, const std::vector<double>& d, const DenseMatrix& b);

double frobenius_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
// Largest |a_ij - a_ji|.
double asymmetry(const DenseMatrix& a);
bool same_shape(const DenseMatrix& a, const DenseMatrix& b);
void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* what);

}  // namespace muonlab
