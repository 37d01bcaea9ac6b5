// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "muonlab/kernels.hpp"
#include "muonlab/random.hpp"

using namespace muonlab;

namespace {

std::vector<const kernels::Table*> variants() {
  std::vector<const kernels::Table*> v;
  if (const auto* t = kernels::avx2_table()) v.push_back(t);
  if (const auto* t = kernels::neon_table()) v.push_back(t);
  return v;
}

std::vector<double> draw(RandomStream& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.gaussian();
  return v;
}

}  // namespace

TEST_CASE("scalar kernels on small hand cases") {
  const auto& s = kernels::scalar_table();
  const double x[] = {1, 2, 3};
  const double y[] = {4, -5, 6};
  CHECK(s.dot(x, y, 3) == 12.0);
  CHECK(s.sumsq(x, 3) == 14.0);
  double z[] = {1, 1, 1};
  s.axpy(3, 2.0, x, z);
  CHECK(z[0] == 3.0);
  CHECK(z[2] == 7.0);
  double a[] = {1, 0};
  double b[] = {0, 1};
  s.rot(2, a, b, 0.0, 1.0);  // quarter turn: (x, y) -> (-y, x)
  CHECK(a[0] == 0.0);
  CHECK(a[1] == -1.0);
  CHECK(b[0] == 1.0);
  CHECK(b[1] == 0.0);
}

TEST_CASE("empty inputs") {
  const auto& s = kernels::scalar_table();
  CHECK(s.dot(nullptr, nullptr, 0) == 0.0);
  CHECK(s.sumsq(nullptr, 0) == 0.0);
  for (const auto* t : variants()) {
    CHECK(t->dot(nullptr, nullptr, 0) == 0.0);
    CHECK(t->sumsq(nullptr, 0) == 0.0);
  }
}

TEST_CASE("SIMD variants agree with the scalar reference") {
  const auto& ref = kernels::scalar_table();
  RandomStream rng(11, 3);
  for (const auto* t : variants()) {
    CAPTURE(t->name);
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 31u, 64u, 100u, 257u}) {
      CAPTURE(n);
      const auto x = draw(rng, n);
      const auto y = draw(rng, n);
      double mag = 0.0;
      for (std::size_t i = 0; i < n; ++i) mag += std::fabs(x[i] * y[i]);
      CHECK(std::fabs(t->dot(x.data(), y.data(), n) - ref.dot(x.data(), y.data(), n)) <= 4e-16 * n * mag);
      const double sq = ref.sumsq(x.data(), n);
      CHECK(std::fabs(t->sumsq(x.data(), n) - sq) <= 4e-16 * n * sq);

      auto y1 = y, y2 = y;
      ref.axpy(n, 0.37, x.data(), y1.data());
      t->axpy(n, 0.37, x.data(), y2.data());
      for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(y1[i] - y2[i]) <= 4e-16 * (std::fabs(y1[i]) + 1.0));

      auto a1 = x, b1 = y, a2 = x, b2 = y;
      const double c = std::cos(0.3), s = std::sin(0.3);
      ref.rot(n, a1.data(), b1.data(), c, s);
      t->rot(n, a2.data(), b2.data(), c, s);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::fabs(a1[i] - a2[i]) <= 4e-16 * (std::fabs(x[i]) + std::fabs(y[i])));
        CHECK(std::fabs(b1[i] - b2[i]) <= 4e-16 * (std::fabs(x[i]) + std::fabs(y[i])));
      }
    }
  }
}

TEST_CASE("force_scalar pins the dispatch table") {
  kernels::force_scalar(true);
  CHECK(&kernels::active() == &kernels::scalar_table());
  kernels::force_scalar(false);
  if (const auto* t = kernels::avx2_table()) CHECK(&kernels::active() == t);
}
