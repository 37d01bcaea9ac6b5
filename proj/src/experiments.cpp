// SPDX-License-Identifier: Apache-2.0
#include "muonlab/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "muonlab/error.hpp"
#include "muonlab/lower_bounds.hpp"
#include "muonlab/svg.hpp"

namespace muonlab {
namespace {

bool is_icl(const ExperimentConfig& cfg) { return cfg.kind == ExperimentKind::IclSweep; }

void require_sweep(const ExperimentConfig& cfg, const char* who) {
  if (cfg.kind != ExperimentKind::MfSweep && cfg.kind != ExperimentKind::IclSweep &&
      cfg.kind != ExperimentKind::RankSweep && cfg.kind != ExperimentKind::PrecondViz) {
    throw Error(ErrorKind::Config, std::string(who) + ": config kind is not a sweep");
  }
}

std::string kappa_tag(double kappa) { return format_double(kappa); }

}  // namespace

std::uint64_t cell_stream_id(const ExperimentConfig& cfg, const CellSpec& cell, std::uint64_t role) {
  const std::uint64_t kind = static_cast<std::uint64_t>(cfg.kind);
  switch (role) {
    case 0: return derive_stream_id({kind, double_bits(cell.kappa), cell.replicate, 0});
    case 1: return derive_stream_id({kind, double_bits(cell.kappa), cell.k, cell.replicate, 1});
    default:
      return derive_stream_id(
          {kind, double_bits(cell.kappa), cell.k, cell.replicate, static_cast<std::uint64_t>(cell.algorithm), role});
  }
}

ProblemInstance make_cell_problem(const ExperimentConfig& cfg, const CellSpec& cell) {
  require_sweep(cfg, "make_cell_problem");
  RandomStream rng(cfg.seed, cell_stream_id(cfg, cell, 0));
  if (is_icl(cfg)) return make_icl_instance(rng, cfg.d, std::cbrt(cell.kappa), cfg.sigma_min);
  return make_mf_instance(rng, cfg.d, cfg.r, cell.k, cell.kappa, cfg.lambda_max);
}

DenseMatrix make_cell_init(const ExperimentConfig& cfg, const CellSpec& cell, const ProblemInstance& problem) {
  if (std::holds_alternative<IclInstance>(problem)) {
    const std::size_t d = iterate_rows(problem);
    return DenseMatrix(d, d);
  }
  RandomStream rng(cfg.seed, cell_stream_id(cfg, cell, 1));
  return cfg.alpha * haar_orthonormal(rng, iterate_rows(problem), iterate_cols(problem));
}

Schedule make_cell_schedule(const ExperimentConfig& cfg, const CellSpec& cell) {
  const double eta0 = default_eta0(cfg, cell.algorithm, cell.kappa);
  switch (cfg.schedule) {
    case ScheduleKind::Exponential:
      return Schedule::exponential(cfg.rho, eta0, cfg.prefactor_mode, cfg.prefactor_min, cfg.prefactor_max);
    case ScheduleKind::Plateau: return Schedule::plateau(eta0, cfg.decay, cfg.patience, cfg.plateau_threshold);
    case ScheduleKind::Constant: return Schedule::constant(eta0);
  }
  throw Error(ErrorKind::Config, "unknown schedule");
}

TrajectoryResult run_cell(const ExperimentConfig& cfg, const CellSpec& cell, const ProblemInstance& problem,
                          const DenseMatrix& init) {
  AlgoConfig algo;
  algo.algorithm = cell.algorithm;
  algo.mu = cfg.mu;
  algo.backend = cfg.msign_backend;
  algo.ns = cfg.ns;
  Schedule sched = make_cell_schedule(cfg, cell);
  RandomStream rng(cfg.seed, cell_stream_id(cfg, cell, 2));
  TrajectoryOptions opts;
  opts.stop_error = cfg.stop_error > 0.0 ? cfg.stop_error : -1.0;
  return run_trajectory(problem, algo, sched, init, cfg.T, rng, opts);
}

TrajectoryResult run_cell(const ExperimentConfig& cfg, const CellSpec& cell) {
  const ProblemInstance problem = make_cell_problem(cfg, cell);
  return run_cell(cfg, cell, problem, make_cell_init(cfg, cell, problem));
}

std::vector<CellSpec> enumerate_cells(const ExperimentConfig& cfg) {
  std::vector<CellSpec> cells;
  const std::vector<std::size_t> ks = is_icl(cfg) ? std::vector<std::size_t>{cfg.d} : cfg.k;
  for (double kappa : cfg.kappa)
    for (std::size_t k : ks)
      for (std::size_t rep = 0; rep < cfg.replicates; ++rep)
        for (Algorithm a : cfg.algorithms) cells.push_back({a, kappa, k, rep});
  return cells;
}

std::string cell_file_name(const ExperimentConfig& cfg, const CellSpec& cell) {
  std::ostringstream os;
  os << to_string(cell.algorithm) << "_kappa" << kappa_tag(cell.kappa);
  if (!is_icl(cfg)) os << "_k" << cell.k;
  os << "_rep" << cell.replicate << ".csv";
  return os.str();
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::MfSweep && cfg.kind != ExperimentKind::IclSweep &&
      cfg.kind != ExperimentKind::RankSweep) {
    throw Error(ErrorKind::Config, "run_experiment: kind must be mf_sweep, icl_sweep or rank_sweep");
  }
  validate(cfg);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + cfg.out + "': " + ec.message());

  ExperimentSummary summary;
  // (algorithm, k) -> series over (kappa, replicate 0)
  std::map<std::pair<int, std::size_t>, std::vector<PlotSeries>> plots;
  std::map<std::tuple<double, std::size_t, std::size_t>, std::pair<ProblemInstance, DenseMatrix>> shared;

  for (const CellSpec& cell : enumerate_cells(cfg)) {
    const auto key = std::make_tuple(cell.kappa, cell.k, cell.replicate);
    auto it = shared.find(key);
    if (it == shared.end()) {
      shared.clear();
      ProblemInstance p = make_cell_problem(cfg, cell);
      DenseMatrix init = make_cell_init(cfg, cell, p);
      it = shared.emplace(key, std::make_pair(std::move(p), std::move(init))).first;
    }
    const TrajectoryResult res = run_cell(cfg, cell, it->second.first, it->second.second);
    const std::string file = cell_file_name(cfg, cell);
    write_text_file((fs::path(cfg.out) / file).string(), trajectory_csv(res));
    summary.files.push_back(file);
    if (res.aborted) {
      ++summary.aborted;
      summary.diagnostics.push_back(file + ": " + res.diagnostic);
    }
    std::vector<double> err;
    for (const TrajectoryRecord& r : res.records) err.push_back(r.spectral_error);
    for (double eps : cfg.epsilon) {
      summary.rows.push_back({to_string(cell.algorithm), cell.kappa, is_icl(cfg) ? cfg.d : cell.k, cell.replicate,
                              eps, first_hit_time(err, eps), file});
    }
    if (cell.replicate == 0) {
      PlotSeries s;
      s.label = (is_icl(cfg) ? "kappa_eff=" : "kappa=") + kappa_tag(cell.kappa);
      for (const TrajectoryRecord& r : res.records) s.x.push_back(static_cast<double>(r.t));
      s.y = err;
      plots[{static_cast<int>(cell.algorithm), cell.k}].push_back(std::move(s));
    }
  }

  write_text_file((fs::path(cfg.out) / "summary.csv").string(), summary_csv(summary.rows));
  summary.files.push_back("summary.csv");
  for (const auto& [key, series] : plots) {
    PlotAxes axes;
    const char* algo = to_string(static_cast<Algorithm>(key.first));
    std::ostringstream name, title;
    name << "plot_" << algo;
    title << algo << (is_icl(cfg) ? " on ICL" : " on MF");
    if (!is_icl(cfg)) {
      name << "_k" << key.second;
      title << ", d=" << cfg.d << ", r=" << cfg.r << ", k=" << key.second;
    } else {
      title << ", d=" << cfg.d;
    }
    name << ".svg";
    write_text_file((fs::path(cfg.out) / name.str()).string(), emit_svg_plot(series, axes));
    summary.files.push_back(name.str());
  }

  std::ostringstream meta;
  meta << "# resolved configuration\n" << render_config(cfg);
  meta << "# stopping rule: T = " << cfg.T << " iterations, early stop once spectral_error <= "
       << format_double(cfg.stop_error) << (cfg.stop_error > 0.0 ? "" : " (disabled)") << "\n";
  if (is_icl(cfg)) meta << "# kappa values are effective condition numbers kappa(S)^3\n";
  meta << "# trajectories: " << enumerate_cells(cfg).size() << ", aborted: " << summary.aborted << "\n";
  for (const std::string& d : summary.diagnostics) meta << "# aborted " << d << "\n";
  write_text_file((fs::path(cfg.out) / "metadata.txt").string(), meta.str());
  summary.files.push_back("metadata.txt");
  return summary;
}

std::vector<LowerBoundRow> run_lower_bound_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + cfg.out + "': " + ec.message());
  std::vector<LowerBoundRow> rows;
  for (double kappa : cfg.kappa) {
    LowerBoundRow row;
    row.kappa = kappa;
    row.bound = (kappa - 1.0) / 4.0;
    std::vector<double> metric;
    std::vector<double> etas;
    switch (cfg.family) {
      case LowerBoundFamily::Quadratic: {
        etas = geometric_etas(cfg.eta0.value_or(1.0), cfg.lb_rho, cfg.T + 1);
        const HardQuadratic hq = build_hard_quadratic(kappa);
        const AdversarialInit init = adversarial_quadratic_init(kappa, etas[0] / kappa, etas, cfg.T);
        const QuadraticRun run = signgd_quadratic_run(hq, init, etas, cfg.T);
        if (run.ties > 0 || run.law_violations > 0) {
          throw Error(ErrorKind::Numerical, "lower_bound: switching law failed: " + run.events.front());
        }
        for (const Vec2& z : run.z) metric.push_back(std::hypot(z[0], z[1]));
        row.T0 = init.T0;
        row.first_hit = run.first_hit;
        break;
      }
      case LowerBoundFamily::Icl: {
        etas = geometric_etas(cfg.eta0.value_or(1.0), cfg.lb_rho, cfg.T + 1);
        const HardIclInstance inst = build_hard_icl_instance(kappa, std::sqrt(2.0) * etas[0] / kappa, etas, cfg.T);
        const MatrixRun run = signgd_icl_run(inst, cfg.T);
        metric = run.metric;
        row.T0 = inst.init.T0;
        row.first_hit = run.first_hit;
        break;
      }
      case LowerBoundFamily::Mf: {
        etas = geometric_etas(cfg.eta0.value_or(cfg.r0 / 4.0), cfg.lb_rho, cfg.T + 1);
        const HardMfInstance inst = build_hard_mf_instance(kappa, cfg.r0, etas, cfg.T);
        const MatrixRun run = signgd_mf_run(inst, cfg.T);
        metric = run.metric;
        row.T0 = inst.init.T0;
        row.first_hit = run.first_hit;
        break;
      }
    }
    row.pass = row.first_hit == kNeverHit || static_cast<double>(row.first_hit) >= row.bound;
    row.file = std::string("lower_bound_") + to_string(cfg.family) + "_kappa" + kappa_tag(kappa) + ".csv";
    std::string csv = "t,eta,metric\n";
    for (std::size_t t = 0; t < metric.size(); ++t) {
      csv += std::to_string(t) + ',' + format_double(t < cfg.T ? etas[t] : 0.0) + ',' + format_double(metric[t]) + '\n';
    }
    write_text_file((fs::path(cfg.out) / row.file).string(), csv);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace muonlab
