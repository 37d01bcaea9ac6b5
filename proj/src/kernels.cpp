// SPDX-License-Identifier: Apache-2.0
#include "muonlab/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace muonlab::kernels {
namespace {

const Table* best_available() {
  const char* env = std::getenv("MUONLAB_FORCE_SCALAR");
  if (env != nullptr && std::strcmp(env, "0") != 0 && env[0] != '\0') return &scalar_table();
  if (const Table* t = avx2_table()) return t;
  if (const Table* t = neon_table()) return t;
  return &scalar_table();
}

std::atomic<const Table*>& slot() {
  static std::atomic<const Table*> s{best_available()};
  return s;
}

}  // namespace

const Table& active() { return *slot().load(std::memory_order_relaxed); }

void force_scalar(bool on) {
  slot().store(on ? &scalar_table() : best_available(), std::memory_order_relaxed);
}

}  // namespace muonlab::kernels
