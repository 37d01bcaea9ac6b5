// SPDX-License-Identifier: Apache-2.0
#include "muonlab/problems.hpp"

#include <cmath>
#include <sstream>

#include "muonlab/error.hpp"
#include "muonlab/kernels.hpp"

namespace muonlab {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorKind::Precondition, msg);
}

DenseMatrix symmetrized(const DenseMatrix& a) {
  DenseMatrix s = a;
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = i + 1; j < s.cols(); ++j) {
      const double m = 0.5 * (a(i, j) + a(j, i));
      s(i, j) = m;
      s(j, i) = m;
    }
  return s;
}

void finish_icl(IclInstance& inst) {
  const auto& ev = inst.eig_s.eigenvalues;
  require(ev.back() > 0.0, "icl instance: S must be positive definite");
  inst.d = inst.s.rows();
  inst.kappa_s = ev.front() / ev.back();
  inst.kappa_eff = inst.kappa_s * inst.kappa_s * inst.kappa_s;
  inst.s_inv = symmetrized(spectral_apply(inst.eig_s, [](double l) { return 1.0 / l; }));
  inst.s_half = symmetrized(spectral_apply(inst.eig_s, [](double l) { return std::sqrt(l); }));
}

}  // namespace

std::vector<double> log_uniform_spectrum(double top, double kappa, std::size_t n) {
  std::vector<double> v(n, top);
  if (n < 2) return v;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    v[i] = top * std::pow(kappa, -static_cast<double>(i) / static_cast<double>(n - 1));
  }
  v[n - 1] = top / kappa;
  return v;
}

MfInstance make_mf_instance(RandomStream& rng, std::size_t d, std::size_t r, std::size_t k, double kappa,
                            double lambda_max) {
  require(r >= 1 && r <= d && r <= k, "make_mf_instance: need 1 <= r <= min(d, k)");
  require(kappa >= 1.0, "make_mf_instance: kappa must be >= 1");
  require(lambda_max > 0.0, "make_mf_instance: lambda_max must be positive");
  const DenseMatrix v = haar_orthonormal(rng, d, r);
  return mf_instance_from(v, log_uniform_spectrum(lambda_max, kappa, r), k);
}

MfInstance mf_instance_from(const DenseMatrix& v, const std::vector<double>& eigenvalues, std::size_t k) {
  require(v.cols() == eigenvalues.size() && !eigenvalues.empty(), "mf_instance_from: basis/eigenvalue mismatch");
  require(v.cols() <= k, "mf_instance_from: rank exceeds search rank k");
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    require(eigenvalues[i] > 0.0, "mf_instance_from: eigenvalues must be positive");
    require(i == 0 || eigenvalues[i] <= eigenvalues[i - 1], "mf_instance_from: eigenvalues must be descending");
  }
  MfInstance inst;
  inst.d = v.rows();
  inst.r = v.cols();
  inst.k = k;
  inst.eigenvalues = eigenvalues;
  inst.eigenvectors = v;
  inst.target = symmetrized(scaled_outer(v, eigenvalues, v));
  inst.kappa = eigenvalues.front() / eigenvalues.back();
  return inst;
}

LossGrad mf_loss_grad(const MfInstance& inst, const DenseMatrix& u) {
  if (u.rows() != inst.d || u.cols() != inst.k) {
    std::ostringstream os;
    os << "mf_loss_grad: U is " << u.rows() << "x" << u.cols() << ", expected " << inst.d << "x" << inst.k;
    throw Error(ErrorKind::Shape, os.str());
  }
  DenseMatrix e = matmul_nt(u, u);
  e -= inst.target;
  LossGrad out;
  out.loss = 0.25 * kernels::sumsq(e.data(), e.size());
  out.grad = matmul(e, u);
  return out;
}

double mf_spectral_error(const MfInstance& inst, const DenseMatrix& u) {
  if (u.rows() != inst.d || u.cols() != inst.k) throw Error(ErrorKind::Shape, "mf_spectral_error: shape mismatch");
  const std::size_t m = inst.k + inst.r;
  if (m >= inst.d) {
    DenseMatrix e = matmul_nt(u, u);
    e -= inst.target;
    return spectral_norm(e);
  }
  // U U^T - M* = W D W^T with W = [U, V*], D = diag(I_k, -Lambda*); with
  // W = QR the spectral norm equals that of the small matrix R D R^T.
  DenseMatrix w(inst.d, m);
  for (std::size_t i = 0; i < inst.d; ++i) {
    for (std::size_t j = 0; j < inst.k; ++j) w(i, j) = u(i, j);
    for (std::size_t j = 0; j < inst.r; ++j) w(i, inst.k + j) = inst.eigenvectors(i, j);
  }
  std::vector<double> dvec(m, 1.0);
  for (std::size_t j = 0; j < inst.r; ++j) dvec[inst.k + j] = -inst.eigenvalues[j];
  const QrFactors qr = qr_householder(w);
  return spectral_norm(scaled_outer(qr.r, dvec, qr.r));
}

IclInstance make_icl_instance(RandomStream& rng, std::size_t d, double kappa_s, double sigma_min) {
  require(d >= 1, "make_icl_instance: d must be positive");
  require(kappa_s >= 1.0, "make_icl_instance: kappa_S must be >= 1");
  require(sigma_min > 0.0, "make_icl_instance: sigma_min must be positive");
  const DenseMatrix v = haar_orthonormal(rng, d, d);
  std::vector<double> lam = log_uniform_spectrum(kappa_s * sigma_min, kappa_s, d);
  lam.back() = sigma_min;
  return icl_instance_from_eig(v, lam);
}

IclInstance icl_instance_from_eig(const DenseMatrix& v, const std::vector<double>& eigenvalues) {
  require(v.rows() == v.cols() && v.cols() == eigenvalues.size() && !eigenvalues.empty(),
          "icl_instance_from_eig: need a square basis matching the eigenvalues");
  for (std::size_t i = 1; i < eigenvalues.size(); ++i) {
    require(eigenvalues[i] <= eigenvalues[i - 1], "icl_instance_from_eig: eigenvalues must be descending");
  }
  IclInstance inst;
  inst.eig_s.eigenvalues = eigenvalues;
  inst.eig_s.eigenvectors = v;
  inst.s = symmetrized(scaled_outer(v, eigenvalues, v));
  finish_icl(inst);
  return inst;
}

IclInstance icl_instance_from(const DenseMatrix& s) {
  IclInstance inst;
  inst.s = symmetrized(s);
  inst.eig_s = symmetric_eig(inst.s);
  finish_icl(inst);
  return inst;
}

void attach_samples(IclInstance& inst, RandomStream& rng) {
  const DenseMatrix q = haar_orthonormal(rng, inst.d, inst.d);
  // Row i is x_i^T = sqrt(d) q_i^T S^{1/2}.
  inst.samples = std::sqrt(static_cast<double>(inst.d)) * matmul_tn(q, inst.s_half);
}

LossGrad icl_loss_grad(const IclInstance& inst, const DenseMatrix& q) {
  if (q.rows() != inst.d || q.cols() != inst.d) throw Error(ErrorKind::Shape, "icl_loss_grad: Q must be d x d");
  DenseMatrix a = matmul(inst.s, q);
  for (std::size_t i = 0; i < inst.d; ++i) a(i, i) -= 1.0;
  LossGrad out;
  // tr(A S A^T) = ||A S^{1/2}||_F^2, nonnegative by construction.
  const DenseMatrix ah = matmul(a, inst.s_half);
  out.loss = 0.5 * kernels::sumsq(ah.data(), ah.size());
  out.grad = matmul(matmul(inst.s, a), inst.s);
  return out;
}

double icl_spectral_error(const IclInstance& inst, const DenseMatrix& q) {
  if (q.rows() != inst.d || q.cols() != inst.d) throw Error(ErrorKind::Shape, "icl_spectral_error: Q must be d x d");
  return spectral_norm(q - inst.s_inv);
}

MonteCarloEstimate icl_monte_carlo_loss(const IclInstance& inst, const DenseMatrix& q, RandomStream& rng,
                                        std::size_t n_tasks) {
  require(inst.has_samples(), "icl_monte_carlo_loss: instance has no sample set");
  require(n_tasks >= 100, "icl_monte_carlo_loss: n_tasks must be >= 100");
  if (q.rows() != inst.d || q.cols() != inst.d) throw Error(ErrorKind::Shape, "icl_monte_carlo_loss: Q must be d x d");
  DenseMatrix a = matmul(inst.s, q);
  for (std::size_t i = 0; i < inst.d; ++i) a(i, i) -= 1.0;
  // Row i: y_i = (SQ - I) x_i, so that w^T S Q x_i - w^T x_i = w^T y_i.
  const DenseMatrix y = matmul_nt(inst.samples, a);
  std::vector<double> w(inst.d);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t n = 1; n <= n_tasks; ++n) {
    for (double& wi : w) wi = rng.gaussian();
    const std::size_t i = rng.index(y.rows());
    const double r = kernels::dot(w.data(), y.row(i), inst.d);
    const double v = 0.5 * r * r;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  const double var = m2 / static_cast<double>(n_tasks - 1);
  return {mean, std::sqrt(var / static_cast<double>(n_tasks))};
}

LossGrad loss_grad(const ProblemInstance& p, const DenseMatrix& x) {
  return std::visit(
      [&](const auto& inst) -> LossGrad {
        if constexpr (std::is_same_v<std::decay_t<decltype(inst)>, MfInstance>) return mf_loss_grad(inst, x);
        else return icl_loss_grad(inst, x);
      },
      p);
}

double spectral_error(const ProblemInstance& p, const DenseMatrix& x) {
  return std::visit(
      [&](const auto& inst) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(inst)>, MfInstance>) return mf_spectral_error(inst, x);
        else return icl_spectral_error(inst, x);
      },
      p);
}

std::size_t iterate_rows(const ProblemInstance& p) {
  return std::visit([](const auto& inst) { return inst.d; }, p);
}

std::size_t iterate_cols(const ProblemInstance& p) {
  if (const auto* mf = std::get_if<MfInstance>(&p)) return mf->k;
  return std::get<IclInstance>(p).d;
}

}  // namespace muonlab
