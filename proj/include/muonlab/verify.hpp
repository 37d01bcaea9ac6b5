// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "muonlab/msign.hpp"

namespace muonlab {

struct CheckResult {
  bool pass = false;
  std::string detail;
};

// msign orthogonality, idempotence, scale invariance and the polar identity
// (msign(Z)^T Z symmetric PSD) on random shapes up to max_rows x max_cols.
CheckResult check_msign_properties(const MsignFn& msign, std::size_t n_matrices, std::size_t max_rows,
                                   std::size_t max_cols, std::uint64_t seed, double tol = 1e-10);

// Newton-Schulz vs exact msign on matrices with sigma_min / sigma_max >= min_ratio.
CheckResult check_newton_schulz_agreement(std::size_t n_seeds, std::size_t max_rows, std::size_t max_cols,
                                          double min_ratio, std::uint64_t seed, double tol = 1e-6);

// Simplified Muon (the given msign, mu = 0) against the diagonal oracle:
// MF aligned inits with k in {r, r + 3, d} and ICL from Q0 = 0.
CheckResult check_decoupling(const MsignFn& msign, std::size_t d, std::size_t r, std::size_t T,
                             std::uint64_t seed, double tol = 1e-10);

struct LemmaCounts {
  std::size_t fixed_traces = 1000;     // fixed prefactor, rho = 1/2
  std::size_t icl_traces = 1000;       // ICL scalar recursion
  std::size_t per_step_traces = 1000;  // per-step prefactor, rho in [2/3, 0.95]
  std::size_t nonzero_traces = 10000;  // no exact zero iterate
  std::size_t steps = 200;
};
CheckResult check_lemma_suites(const LemmaCounts& counts, std::uint64_t seed);

// Constructed SignGD lower-bound runs: quadratic kappa in {21, 101, 401},
// ICL kappa = 101 and MF kappa = 41.
CheckResult check_lower_bounds();

// Central finite differences of both objectives vs the analytic gradients.
CheckResult check_gradients(std::size_t n_points, std::size_t max_d, std::uint64_t seed, double tol = 1e-6);

// Monte-Carlo ICL loss within z_max standard errors of the closed form.
CheckResult check_monte_carlo(std::size_t n_q, std::size_t n_tasks, std::size_t d, std::uint64_t seed,
                              double z_max = 5.0);

struct VerifyOptions {
  MsignFn msign;  // defaults to msign_exact
  std::uint64_t seed = 2024;
};

const std::vector<std::string>& verify_suite_names();  // without "all"

// Prints one "SUITE <name> PASS|FAIL <detail>" line per executed suite and
// returns true when all pass. Throws Error(ErrorKind::Config) on unknown names.
bool run_verify(const std::string& suite, std::ostream& out, const VerifyOptions& opts = {});

}  // namespace muonlab
