// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "muonlab/config.hpp"
#include "muonlab/csv.hpp"
#include "muonlab/optimizers.hpp"
#include "muonlab/problems.hpp"

namespace muonlab {

// One (algorithm, kappa, k, replicate) trajectory of a sweep.
struct CellSpec {
  Algorithm algorithm = Algorithm::Muon;
  double kappa = 1.0;
  std::size_t k = 0;  // ignored for ICL
  std::size_t replicate = 0;
};

// Instance and init streams depend only on (kind, kappa, k, replicate), so
// every algorithm in a cell sees the same problem and starting point.
ProblemInstance make_cell_problem(const ExperimentConfig& cfg, const CellSpec& cell);
DenseMatrix make_cell_init(const ExperimentConfig& cfg, const CellSpec& cell, const ProblemInstance& problem);
Schedule make_cell_schedule(const ExperimentConfig& cfg, const CellSpec& cell);
std::uint64_t cell_stream_id(const ExperimentConfig& cfg, const CellSpec& cell, std::uint64_t role);

TrajectoryResult run_cell(const ExperimentConfig& cfg, const CellSpec& cell, const ProblemInstance& problem,
                          const DenseMatrix& init);
TrajectoryResult run_cell(const ExperimentConfig& cfg, const CellSpec& cell);

std::vector<CellSpec> enumerate_cells(const ExperimentConfig& cfg);
std::string cell_file_name(const ExperimentConfig& cfg, const CellSpec& cell);

struct ExperimentSummary {
  std::vector<SummaryRow> rows;
  std::vector<std::string> files;  // every file written, relative to cfg.out
  std::vector<std::string> diagnostics;
  std::size_t aborted = 0;
};

// Sweeps (mf_sweep, icl_sweep, rank_sweep): per-cell CSVs, summary.csv,
// one SVG per (algorithm, k) and metadata.txt under cfg.out.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

struct LowerBoundRow {
  double kappa = 1.0;
  std::size_t T0 = 0;
  std::size_t first_hit = 0;
  double bound = 0.0;  // (kappa - 1) / 4
  bool pass = false;
  std::string file;
};

// Constructed SignGD runs for cfg.family over cfg.kappa, written under cfg.out.
std::vector<LowerBoundRow> run_lower_bound_experiment(const ExperimentConfig& cfg);

}  // namespace muonlab
