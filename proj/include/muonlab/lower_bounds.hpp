// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "muonlab/matrix.hpp"
#include "muonlab/problems.hpp"

namespace muonlab {

using Vec2 = std::array<double, 2>;

inline constexpr std::size_t kNeverHit = std::numeric_limits<std::size_t>::max();

// H = 1/2 [[k+1, k-1], [k-1, k+1]] = R diag(k, 1) R^T, R = (1/sqrt2) [[1, -1], [1, 1]].
struct HardQuadratic {
  double kappa = 1.0;
  DenseMatrix h;
  DenseMatrix r;
};

HardQuadratic build_hard_quadratic(double kappa);

Vec2 rotate(const HardQuadratic& hq, const Vec2& zt);      // z = R zt
Vec2 unrotate(const HardQuadratic& hq, const Vec2& z);     // zt = R^T z

// Learning-rate barrier: the first rotated coordinate alternates along a chain
// built backwards from T0 while the second one stays pinned at kappa * eps.
struct AdversarialInit {
  Vec2 z0{};
  Vec2 x0{};
  std::size_t T0 = 0;
  double epsilon = 0.0;
  std::vector<double> x1_chain;  // x_{1,t} for t = 0..T0
};

// etas must hold at least T + 1 positive, non-increasing values.
AdversarialInit adversarial_quadratic_init(double kappa, double epsilon, const std::vector<double>& etas,
                                           std::size_t T);

struct QuadraticRun {
  std::vector<Vec2> z;  // T + 1 iterates
  std::size_t first_hit = kNeverHit;
  std::size_t ties = 0;
  std::size_t law_violations = 0;
  double barrier_deviation = 0.0;  // max_{t <= T0} |zt_2 - sqrt2 kappa eps|
  std::vector<std::string> events;
};

// z_{t+1} = z_t - eta_t sign(H z_t), with the one-coordinate switching law checked per step.
QuadraticRun signgd_quadratic_run(const HardQuadratic& hq, const AdversarialInit& init,
                                  const std::vector<double>& etas, std::size_t T);

struct HardMfInstance {
  HardQuadratic quad;
  double r0 = 1.0 / 16.0;
  double epsilon = 0.0;  // loss target 9 r0^2 / (4096 kappa^2)
  DenseMatrix u_star;
  DenseMatrix u0;
  Vec2 delta0{};
  AdversarialInit init;  // barrier in x = delta / sqrt2 against steps sqrt2 eta_t
  std::vector<double> etas;
};

// etas are the step sizes applied to U; eta_0 <= r0 required.
HardMfInstance build_hard_mf_instance(double kappa, double r0, const std::vector<double>& etas, std::size_t T);

struct MatrixRun {
  std::vector<double> metric;  // loss (MF) or ||Q_t - Q*||_F (ICL), T + 1 values
  std::size_t first_hit = kNeverHit;
  double slice_deviation = 0.0;  // max over steps of the distance to the symmetric-circulant slice
  double bridge_error = 0.0;     // ICL only: max | ||Q - Q*||_F - sqrt2 ||z|| |
};

MatrixRun signgd_mf_run(const HardMfInstance& inst, std::size_t T);

struct HardIclInstance {
  HardQuadratic quad;
  IclInstance icl;
  double epsilon = 0.0;  // target for ||Q_t - Q*||_F
  double a_star = 0.0, b_star = 0.0;
  AdversarialInit init;  // in z = (a - a*, b - b*) at accuracy eps / sqrt2
  DenseMatrix q0;
  std::vector<double> etas;
};

HardIclInstance build_hard_icl_instance(double kappa, double epsilon, const std::vector<double>& etas,
                                        std::size_t T);
MatrixRun signgd_icl_run(const HardIclInstance& inst, std::size_t T);

// Distance of a 2x2 matrix from the set {[[p, q], [q, p]]}.
double slice_deviation(const DenseMatrix& m);

std::size_t first_hit_time(const std::vector<double>& metric, double epsilon);

// eta_t = eta0 rho^t for t = 0..n-1.
std::vector<double> geometric_etas(double eta0, double rho, std::size_t n);

}  // namespace muonlab
