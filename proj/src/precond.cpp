// SPDX-License-Identifier: Apache-2.0
#include "muonlab/precond.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "muonlab/csv.hpp"
#include "muonlab/error.hpp"
#include "muonlab/experiments.hpp"
#include "muonlab/linalg.hpp"
#include "muonlab/svg.hpp"

namespace muonlab {
namespace {

double trace(const DenseMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i);
  return s;
}

DenseMatrix symmetrize(const DenseMatrix& a) {
  DenseMatrix s = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) s(i, j) = s(j, i) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

}  // namespace

DenseMatrix psd_sqrt(const DenseMatrix& a) {
  if (frobenius_norm(a) == 0.0) return DenseMatrix(a.rows(), a.cols());
  const SymEigFactors f = symmetric_eig(symmetrize(a));
  return symmetrize(spectral_apply(f, [](double l) { return std::sqrt(std::max(l, 0.0)); }));
}

double psd_defect(const DenseMatrix& a) {
  const double norm = frobenius_norm(a);
  if (norm == 0.0) return 0.0;
  const double asym = asymmetry(a) / norm;
  const SymEigFactors f = symmetric_eig(symmetrize(a));
  return std::max(asym, std::max(0.0, -f.eigenvalues.back() / norm));
}

PreconditionerReport preconditioner_report(const ExperimentConfig& cfg) {
  if (cfg.steps.empty()) throw Error(ErrorKind::Config, "precond_viz: no report steps");
  ExperimentConfig run_cfg = cfg;
  run_cfg.kind = ExperimentKind::PrecondViz;
  run_cfg.msign_backend = MsignBackend::Exact;
  run_cfg.mu = 0.0;
  validate(run_cfg);
  const std::size_t last = *std::max_element(cfg.steps.begin(), cfg.steps.end());
  if (last > cfg.T) {
    throw Error(ErrorKind::Precondition, "precond_viz: step " + std::to_string(last) +
                                             " is beyond the trajectory length T = " + std::to_string(cfg.T));
  }

  const CellSpec cell{Algorithm::Muon, cfg.kappa.front(), cfg.k.front(), 0};
  const ProblemInstance problem = make_cell_problem(run_cfg, cell);
  const DenseMatrix init = make_cell_init(run_cfg, cell, problem);
  AlgoConfig algo;
  Schedule sched = make_cell_schedule(run_cfg, cell);
  RandomStream rng(cfg.seed, cell_stream_id(run_cfg, cell, 2));
  TrajectoryOptions opts;
  opts.keep_iterates = true;
  opts.sigma_min_max_dim = 0;
  const TrajectoryResult res = run_trajectory(problem, algo, sched, init, std::max<std::size_t>(last, 1), rng, opts);
  if (res.iterates.size() <= last) {
    throw Error(ErrorKind::Precondition, "precond_viz: step " + std::to_string(last) + " is beyond the trajectory (" +
                                             std::to_string(res.iterates.size()) + " iterates" +
                                             (res.aborted ? ", " + res.diagnostic : std::string()) + ")");
  }

  PreconditionerReport rep;
  for (std::size_t t : cfg.steps) {
    const DenseMatrix& u = res.iterates[t];
    const DenseMatrix g = loss_grad(problem, u).grad;
    DenseMatrix pm = psd_sqrt(matmul_tn(g, g));
    DenseMatrix ps = symmetrize(matmul_tn(u, u));
    const double tm = trace(pm), ts = trace(ps);
    rep.steps.push_back(t);
    rep.normalized_difference.push_back(tm > 0.0 && ts > 0.0 ? frobenius_norm((1.0 / tm) * pm - (1.0 / ts) * ps)
                                                             : NAN);
    rep.psd_defect.push_back(std::max(psd_defect(pm), psd_defect(ps)));
    rep.p_muon.push_back(std::move(pm));
    rep.p_scaledgd.push_back(std::move(ps));
  }
  return rep;
}

std::vector<std::string> write_preconditioner_report(const ExperimentConfig& cfg, const PreconditionerReport& rep) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + cfg.out + "': " + ec.message());
  std::vector<std::string> files;
  std::string csv = "step,trace_muon,trace_scaledgd,normalized_difference,psd_defect\n";
  for (std::size_t i = 0; i < rep.steps.size(); ++i) {
    const std::size_t t = rep.steps[i];
    csv += std::to_string(t) + ',' + format_double(trace(rep.p_muon[i])) + ',' +
           format_double(trace(rep.p_scaledgd[i])) + ',' + format_double(rep.normalized_difference[i]) + ',' +
           format_double(rep.psd_defect[i]) + '\n';
    const std::string tag = "_t" + std::to_string(t) + ".svg";
    const double tm = trace(rep.p_muon[i]), ts = trace(rep.p_scaledgd[i]);
    const DenseMatrix nm = tm > 0.0 ? (1.0 / tm) * rep.p_muon[i] : rep.p_muon[i];
    const DenseMatrix ns = ts > 0.0 ? (1.0 / ts) * rep.p_scaledgd[i] : rep.p_scaledgd[i];
    write_text_file((fs::path(cfg.out) / ("precond_muon" + tag)).string(),
                    emit_svg_heatmap(nm, "Muon block (G^T G)^1/2 / trace, t=" + std::to_string(t)));
    write_text_file((fs::path(cfg.out) / ("precond_scaledgd" + tag)).string(),
                    emit_svg_heatmap(ns, "ScaledGD block U^T U / trace, t=" + std::to_string(t)));
    files.push_back("precond_muon" + tag);
    files.push_back("precond_scaledgd" + tag);
  }
  write_text_file((fs::path(cfg.out) / "precond_report.csv").string(), csv);
  files.push_back("precond_report.csv");
  return files;
}

double kronecker_identity_gap(RandomStream& rng, std::size_t d, std::size_t k) {
  const DenseMatrix g = gaussian_matrix(rng, d, k);
  const DenseMatrix b = gaussian_matrix(rng, k, k);
  const DenseMatrix p = symmetrize(matmul_tn(b, b));
  DenseMatrix kron(d * k, d * k);
  for (std::size_t blk = 0; blk < d; ++blk)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) kron(blk * k + i, blk * k + j) = p(i, j);
  const DenseMatrix vec_g(d * k, 1, std::vector<double>(g.data(), g.data() + g.size()));
  const DenseMatrix lhs = matmul(kron, vec_g);
  const DenseMatrix gp = matmul(g, p);
  double gap = 0.0;
  for (std::size_t i = 0; i < d * k; ++i) gap = std::max(gap, std::fabs(lhs(i, 0) - gp.data()[i]));
  return gap;
}

}  // namespace muonlab
