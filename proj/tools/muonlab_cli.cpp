// SPDX-License-Identifier: Apache-2.0
// muonlab command line: sweeps, lower-bound constructions, preconditioner
// heatmaps and verification suites.
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "muonlab/config.hpp"
#include "muonlab/error.hpp"
#include "muonlab/experiments.hpp"
#include "muonlab/lower_bounds.hpp"
#include "muonlab/precond.hpp"
#include "muonlab/verify.hpp"

using namespace muonlab;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kNumericalError = 3 };

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config:
    case ErrorKind::Precondition:
    case ErrorKind::Shape: return kConfigError;
    default: return kNumericalError;
  }
}

int run_sweep(const ExperimentConfig& cfg) {
  const ExperimentSummary s = run_experiment(cfg);
  std::cout << "wrote " << s.files.size() << " files to " << cfg.out << "\n";
  for (const SummaryRow& r : s.rows) {
    std::cout << r.algorithm << " kappa=" << format_double(r.kappa) << " k=" << r.k << " rep=" << r.replicate
              << " eps=" << format_double(r.epsilon) << " first_hit="
              << (r.first_hit == kNeverHit ? std::string("inf") : std::to_string(r.first_hit)) << "\n";
  }
  for (const std::string& d : s.diagnostics) std::cerr << "aborted: " << d << "\n";
  return s.aborted > 0 ? kNumericalError : kOk;
}

int run_lower_bound(const ExperimentConfig& cfg) {
  const auto rows = run_lower_bound_experiment(cfg);
  bool ok = true;
  for (const LowerBoundRow& r : rows) {
    std::cout << to_string(cfg.family) << " kappa=" << format_double(r.kappa) << " T0=" << r.T0 << " first_hit="
              << (r.first_hit == kNeverHit ? std::string("inf") : std::to_string(r.first_hit))
              << " bound=" << format_double(r.bound) << (r.pass ? " PASS" : " FAIL") << " -> " << r.file << "\n";
    ok = ok && r.pass;
  }
  return ok ? kOk : kVerifyFailed;
}

int run_precond(const ExperimentConfig& cfg) {
  const PreconditionerReport rep = preconditioner_report(cfg);
  const auto files = write_preconditioner_report(cfg, rep);
  bool ok = true;
  for (std::size_t i = 0; i < rep.steps.size(); ++i) {
    std::cout << "t=" << rep.steps[i] << " normalized_difference=" << format_double(rep.normalized_difference[i])
              << " psd_defect=" << format_double(rep.psd_defect[i]) << "\n";
    ok = ok && rep.psd_defect[i] <= 1e-10;
  }
  RandomStream rng(cfg.seed, derive_stream_id({0x6b726f6eULL}));
  const double gap = kronecker_identity_gap(rng, 4, cfg.k.front());
  std::cout << "kronecker identity gap (d=4) = " << format_double(gap) << "\n";
  ok = ok && gap <= 1e-12;
  std::cout << "wrote " << files.size() << " files to " << cfg.out << "\n";
  return ok ? kOk : kVerifyFailed;
}

int run_verify_suite(const std::string& suite) { return run_verify(suite, std::cout) ? kOk : kVerifyFailed; }

int dispatch(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::MfSweep:
    case ExperimentKind::IclSweep:
    case ExperimentKind::RankSweep: return run_sweep(cfg);
    case ExperimentKind::LowerBound: return run_lower_bound(cfg);
    case ExperimentKind::PrecondViz: return run_precond(cfg);
    case ExperimentKind::Verify: return run_verify_suite(cfg.suite);
  }
  return kConfigError;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ",") + format_double(x);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"muonlab: spectral optimizer experiments on matrix factorization and linear-attention ICL"};
  app.require_subcommand(1);
  app.footer("Config keys (run --config):\n" + config_key_reference() +
             "Exit codes: 0 success, 1 verification failure, 2 config error, 3 numerical failure.");

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("--config", config_path, "config file (flat key = value)")->required();
  auto* run_out = run->add_option("--out", out_dir, "output directory (overrides 'out')");
  auto* run_seed = run->add_option("--seed", seed, "base seed (overrides 'seed')");

  std::string family = "quadratic";
  std::vector<double> lb_kappa = {21, 101, 401};
  std::size_t lb_T = 2000;
  double lb_rho = 0.98, lb_r0 = 1.0 / 16.0;
  double lb_eta0 = 0.0;
  std::string lb_out = "out/lower_bound";
  auto* lb = app.add_subcommand("lower-bound", "Constructed SignGD lower-bound runs");
  lb->add_option("--family", family, "quadratic | mf | icl")->check(CLI::IsMember({"quadratic", "mf", "icl"}));
  lb->add_option("--kappa", lb_kappa, "condition numbers")->delimiter(',');
  lb->add_option("--T", lb_T, "iterations");
  lb->add_option("--rho", lb_rho, "schedule decay, eta_t = eta0 rho^t");
  lb->add_option("--eta0", lb_eta0, "initial step (default 1, or r0/4 for mf)");
  lb->add_option("--r0", lb_r0, "MF radius");
  lb->add_option("--out", lb_out, "output directory");

  std::string pv_config, pv_out = "out/precond";
  std::size_t pv_d = 10, pv_r = 5, pv_k = 5;
  double pv_alpha = 1e-10, pv_kappa = 25;
  std::vector<std::size_t> pv_steps = {0, 500, 1000};
  std::uint64_t pv_seed = 42;
  auto* pv = app.add_subcommand("precond-viz", "Muon vs ScaledGD preconditioner blocks and heatmaps");
  pv->add_option("--config", pv_config, "optional config file; flags below are ignored when given");
  pv->add_option("--d", pv_d, "dimension");
  pv->add_option("--r", pv_r, "target rank");
  pv->add_option("--k", pv_k, "search rank");
  pv->add_option("--alpha", pv_alpha, "initialization scale");
  pv->add_option("--kappa", pv_kappa, "condition number");
  pv->add_option("--steps", pv_steps, "report steps")->delimiter(',');
  pv->add_option("--seed", pv_seed, "seed");
  pv->add_option("--out", pv_out, "output directory");

  std::string suite = "all";
  auto* ver = app.add_subcommand("verify", "Run invariant suites; prints SUITE <name> PASS|FAIL <detail>");
  ver->add_option("--suite", suite, "msign | oracle | lemmas | lowerbounds | gradients | montecarlo | all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      ExperimentConfig cfg = load_config(config_path);
      if (*run_out) cfg.out = out_dir;
      if (*run_seed) cfg.seed = seed;
      return dispatch(cfg);
    }
    if (*lb) {
      std::ostringstream text;
      text << "kind = lower_bound\nfamily = " << family << "\nkappa = " << list_text(lb_kappa) << "\nT = " << lb_T
           << "\nlb_rho = " << format_double(lb_rho) << "\nr0 = " << format_double(lb_r0) << "\nout = " << lb_out
           << "\n";
      if (lb_eta0 > 0.0) text << "eta0 = " << format_double(lb_eta0) << "\n";
      return dispatch(parse_config(text.str()));
    }
    if (*pv) {
      if (!pv_config.empty()) return dispatch(load_config(pv_config));
      std::ostringstream text;
      text << "kind = precond_viz\nd = " << pv_d << "\nr = " << pv_r << "\nk = " << pv_k
           << "\nalpha = " << format_double(pv_alpha) << "\nkappa = " << format_double(pv_kappa) << "\nsteps = ";
      for (std::size_t i = 0; i < pv_steps.size(); ++i) text << (i ? "," : "") << pv_steps[i];
      const std::size_t last = pv_steps.empty() ? 1 : *std::max_element(pv_steps.begin(), pv_steps.end());
      text << "\nT = " << std::max<std::size_t>(1, last);
      text << "\nseed = " << pv_seed << "\nout = " << pv_out << "\n";
      return dispatch(parse_config(text.str()));
    }
    if (*ver) return run_verify_suite(suite);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalError;
  }
  return kConfigError;
}
