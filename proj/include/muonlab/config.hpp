// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "muonlab/msign.hpp"
#include "muonlab/optimizers.hpp"

namespace muonlab {

enum class ExperimentKind { MfSweep, IclSweep, RankSweep, LowerBound, PrecondViz, Verify };
enum class ScheduleKind { Exponential, Plateau, Constant };
enum class LowerBoundFamily { Quadratic, Mf, Icl };

const char* to_string(ExperimentKind k);
const char* to_string(ScheduleKind k);
const char* to_string(LowerBoundFamily f);

// Flat key = value configuration. For icl_sweep the kappa list holds the
// effective condition numbers kappa(S)^3.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::MfSweep;
  std::size_t d = 100;
  std::size_t r = 2;
  std::vector<std::size_t> k = {2};
  std::vector<double> kappa = {1, 5, 25, 125, 625};
  std::vector<Algorithm> algorithms = {Algorithm::Muon, Algorithm::GD, Algorithm::SignGD, Algorithm::ScaledGD};

  ScheduleKind schedule = ScheduleKind::Plateau;
  double rho = 0.5;
  std::optional<double> eta0;                 // overrides every algorithm's default
  std::map<Algorithm, double> eta0_per_algo;  // eta0_<algo> keys
  PrefactorMode prefactor_mode = PrefactorMode::FixedOnce;
  double prefactor_min = 1.0;
  double prefactor_max = 2.0;
  double decay = 0.3;
  int patience = 50;
  double plateau_threshold = 1e-4;

  double lambda_max = 1.0;
  double sigma_min = 1.0;
  double alpha = 0.1;
  std::size_t T = 5000;
  std::vector<double> epsilon = {1e-6, 1e-10};
  double stop_error = 1e-12;
  std::uint64_t seed = 42;
  std::size_t replicates = 1;
  std::string out = "out";

  double mu = 0.0;
  MsignBackend msign_backend = MsignBackend::Exact;
  NewtonSchulzConfig ns;

  std::vector<std::size_t> steps = {0, 500, 1000};
  std::string suite = "all";
  LowerBoundFamily family = LowerBoundFamily::Quadratic;
  double r0 = 1.0 / 16.0;
  double lb_rho = 0.98;
};

// Throws Error(ErrorKind::Config) naming the key and line on any problem.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Cross-field checks (rank ordering, algorithm/problem compatibility).
void validate(const ExperimentConfig& cfg);

// Default initial step size for an algorithm on the configured problem family.
double default_eta0(const ExperimentConfig& cfg, Algorithm a, double kappa_value);

// Key reference, one line per key, for --help.
std::string config_key_reference();

// Canonical key = value rendering of a config, used in run metadata.
std::string render_config(const ExperimentConfig& cfg);

Algorithm parse_algorithm(const std::string& name);

}  // namespace muonlab
