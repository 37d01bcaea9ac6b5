// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

#include "muonlab/matrix.hpp"

namespace muonlab {

// xoshiro256** (Blackman & Vigna, 2018) keyed by (seed, stream_id).
//
// Seeding: the four state words are the first four outputs of splitmix64
// started from seed ^ splitmix64_mix(stream_id ^ 0xD1B54A32D192ED03).
// uniform01 = (next() >> 11) * 2^-53. Gaussians use Box-Muller on
// (1 - uniform01, uniform01) and return the cosine branch, then the sine branch.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next();
  double uniform01();
  // Value in [lo, hi); throws unless lo < hi.
  double uniform(double lo, double hi);
  double gaussian();
  // Uniform index in [0, n).
  std::size_t index(std::size_t n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64_mix(std::uint64_t x);
// Order-sensitive hash of integer coordinates, for per-cell stream ids.
std::uint64_t derive_stream_id(std::initializer_list<std::uint64_t> parts);
std::uint64_t double_bits(double v);

DenseMatrix gaussian_matrix(RandomStream& rng, std::size_t rows, std::size_t cols);
// d x k with orthonormal columns, Haar distributed.
DenseMatrix haar_orthonormal(RandomStream& rng, std::size_t d, std::size_t k);

}  // namespace muonlab
