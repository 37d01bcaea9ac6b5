// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "muonlab/error.hpp"
#include "muonlab/matrix.hpp"
#include "muonlab/random.hpp"

using namespace muonlab;

TEST_CASE("construction checks size and finiteness") {
  CHECK_THROWS_AS(DenseMatrix(2, 2, {1, 2, 3}), Error);
  CHECK_THROWS_AS(DenseMatrix(1, 2, {1, std::numeric_limits<double>::quiet_NaN()}), Error);
  CHECK_THROWS_AS(DenseMatrix(1, 1, {std::numeric_limits<double>::infinity()}), Error);
  const DenseMatrix m{{1, 2}, {3, 4}, {5, 6}};
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 2);
  CHECK(m(2, 1) == 6);
  CHECK(m.values().size() == 6);
}

TEST_CASE("products against hand results") {
  const DenseMatrix a{{1, 2}, {3, 4}};
  const DenseMatrix b{{0, 1}, {1, 0}};
  const DenseMatrix ab = matmul(a, b);
  CHECK(ab(0, 0) == 2);
  CHECK(ab(0, 1) == 1);
  CHECK(ab(1, 0) == 4);
  CHECK(max_abs_diff(matmul_tn(a, b), matmul(a.transposed(), b)) == 0.0);
  CHECK(max_abs_diff(matmul_nt(a, b), matmul(a, b.transposed())) == 0.0);
  const DenseMatrix so = scaled_outer(a, {2, -1}, b);
  CHECK(max_abs_diff(so, matmul(matmul(a, DenseMatrix::diag({2, -1})), b.transposed())) == 0.0);
  CHECK_THROWS_AS(matmul(a, DenseMatrix(3, 1)), Error);
}

TEST_CASE("norms") {
  const DenseMatrix a{{3, 0}, {0, -4}};
  CHECK(frobenius_norm(a) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(max_abs(a) == 4.0);
  CHECK(frobenius_norm(DenseMatrix(3, 3)) == 0.0);
  // scaled accumulation survives values whose squares overflow
  const DenseMatrix big{{1e200, 1e200}};
  CHECK(frobenius_norm(big) == doctest::Approx(std::sqrt(2.0) * 1e200).epsilon(1e-14));
  CHECK(asymmetry(DenseMatrix{{1, 2}, {2.5, 1}}) == 0.5);
}

TEST_CASE("matmul matches a naive triple loop on random shapes") {
  RandomStream rng(5, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng.index(9), k = 1 + rng.index(9), n = 1 + rng.index(9);
    const DenseMatrix a = gaussian_matrix(rng, m, k);
    const DenseMatrix b = gaussian_matrix(rng, k, n);
    DenseMatrix ref(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t p = 0; p < k; ++p) ref(i, j) += a(i, p) * b(p, j);
    CHECK(max_abs_diff(matmul(a, b), ref) <= 1e-13);
  }
}
