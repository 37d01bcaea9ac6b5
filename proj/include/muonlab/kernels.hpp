// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

// Inner-loop kernels used by the dense linear algebra. Each kernel has a
// portable scalar reference and optional SIMD variants (AVX2+FMA on x86-64,
// NEON on AArch64). The variant is picked once at runtime from the CPU
// features; MUONLAB_FORCE_SCALAR=1 in the environment pins the scalar path.
namespace muonlab::kernels {

struct Table {
  const char* name;
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(std::size_t n, double a, const double* x, double* y);
  // (x, y) <- (c*x - s*y, s*x + c*y)
  void (*rot)(std::size_t n, double* x, double* y, double c, double s);
  double (*sumsq)(const double* x, std::size_t n);
};

const Table& scalar_table();
// nullptr when the variant is not compiled in or the CPU lacks the feature.
const Table* avx2_table();
const Table* neon_table();

const Table& active();
void force_scalar(bool on);

inline double dot(const double* x, const double* y, std::size_t n) { return active().dot(x, y, n); }
inline void axpy(std::size_t n, double a, const double* x, double* y) { active().axpy(n, a, x, y); }
inline void rot(std::size_t n, double* x, double* y, double c, double s) { active().rot(n, x, y, c, s); }
inline double sumsq(const double* x, std::size_t n) { return active().sumsq(x, n); }

}  // namespace muonlab::kernels
