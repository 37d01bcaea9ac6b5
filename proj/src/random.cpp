// SPDX-License-Identifier: Apache-2.0
#include "muonlab/random.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "muonlab/error.hpp"
#include "muonlab/linalg.hpp"

namespace muonlab {
namespace {

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  return splitmix64_mix(state);
}

}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_stream_id(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243F6A8885A308D3ULL;
  for (std::uint64_t p : parts) h = splitmix64_mix(h ^ splitmix64_mix(p + 0x9E3779B97F4A7C15ULL));
  return h;
}

std::uint64_t double_bits(double v) { return std::bit_cast<std::uint64_t>(v); }

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
  std::uint64_t sm = seed ^ splitmix64_mix(stream_id ^ 0xD1B54A32D192ED03ULL);
  for (auto& w : s_) w = splitmix64_next(sm);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t RandomStream::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RandomStream::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double RandomStream::uniform(double lo, double hi) {
  if (!(lo < hi)) throw Error(ErrorKind::Precondition, "uniform: need lo < hi");
  const double v = lo + (hi - lo) * uniform01();
  return v < hi ? v : std::nextafter(hi, lo);
}

double RandomStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform01();  // (0, 1]
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(th);
  has_spare_ = true;
  return r * std::cos(th);
}

std::size_t RandomStream::index(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::Precondition, "index: empty range");
  const auto i = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

DenseMatrix gaussian_matrix(RandomStream& rng, std::size_t rows, std::size_t cols) {
  DenseMatrix g(rows, cols);
  for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = rng.gaussian();
  return g;
}

DenseMatrix haar_orthonormal(RandomStream& rng, std::size_t d, std::size_t k) {
  if (k > d) {
    throw Error(ErrorKind::Precondition,
                "haar_orthonormal: k = " + std::to_string(k) + " exceeds d = " + std::to_string(d));
  }
  const QrFactors qr = qr_householder(gaussian_matrix(rng, d, k));
  DenseMatrix q = qr.q;
  for (std::size_t j = 0; j < k; ++j) {
    if (qr.r(j, j) < 0.0) {  // sign(0) counts as +1
      for (std::size_t i = 0; i < d; ++i) q(i, j) = -q(i, j);
    }
  }
  return q;
}

}  // namespace muonlab
