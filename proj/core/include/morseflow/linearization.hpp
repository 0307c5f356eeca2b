#pragma once

// Variational flow V(t) = d(phi_t)(v0) along a gradient flow line, the energy
// identity dE/dt = -Hess f(V, V) for E = |V|^2 / 2, and decay-rate fitting.

#include "morseflow/flow.hpp"

#include <array>
#include <vector>

namespace morseflow::linearization {

using geometry::Matrix;
using geometry::Vector;

struct VariationalSample {
  double t = 0;
  Vector x;
  double f = 0;
  double grad_norm = 0;
  Matrix vectors;  // n x k, column j is d(phi_t)(v0_j)

  double energy(Eigen::Index j = 0) const { return 0.5 * vectors.col(j).squaredNorm(); }
};

struct VariationalSeries {
  std::vector<VariationalSample> samples;
  flow::Terminal terminal = flow::Terminal::MaxTimeReached;
  int limit_id = -1;
  flow::Direction direction = flow::Direction::Forward;
  double max_tangency_drift = 0;  // max |J V| / |V| before the per-step projection
  flow::TrajectoryStats stats;

  /// Base trajectory (positions, values, gradient norms, terminal).
  flow::Trajectory base() const;
};

/// Relative step of the central difference used for A(x) V: 1e-6 * max(1, |x|).
inline constexpr double kDirectionalStep = 1e-6;

/// Co-integrates x' = -P grad f and V' = -A(x) V for every column of v0,
/// where A(x) V is the central-difference directional derivative of the
/// ambient field x -> P(x) grad f(x). Samples are taken on accepted steps.
VariationalSeries integrate_variational(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                                        const Vector& x0, const Matrix& v0, const flow::FlowConfig& cfg,
                                        const std::vector<morse::CriticalPoint>& crits,
                                        flow::Direction direction = flow::Direction::Forward);

inline VariationalSeries integrate_variational(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                                               const geometry::TangentVector& v0, const flow::FlowConfig& cfg,
                                               const std::vector<morse::CriticalPoint>& crits) {
  return integrate_variational(m, f, v0.base, Matrix(v0.vec), cfg, crits);
}

/// Directional derivative of the field P grad f at x along v.
Vector field_derivative(const geometry::ImplicitManifold& m, const symbolics::Expression& f, const Vector& x,
                        const Vector& v);

struct EnergyCheck {
  double max_relative_residual = 0;
  std::size_t samples_checked = 0;
  std::vector<double> rate_ratio;  // -E'/(2E) on every checked sample
};

/// Three-point finite difference of E(t) against -Hess f(V, V) on interior
/// samples with |dE/dt| > 1e-10 (column `column` of the series).
EnergyCheck check_energy_ode(const VariationalSeries& series, const geometry::ImplicitManifold& m,
                             const symbolics::Expression& f, Eigen::Index column = 0);

struct DecayReport {
  double c_fit = 0;
  double c_pred = 0;
  std::array<double, 2> fit_window{0, 0};
  double residual = 0;
  double relative_gap = 0;
  int limit_id = -1;
  std::size_t fit_samples = 0;
};

/// Least-squares slope of log|V| over samples [0.6 N, 0.95 N); c_pred is the
/// smallest intrinsic Hessian eigenvalue at the limiting minimum.
DecayReport fit_decay_rate(const VariationalSeries& series, const std::vector<morse::CriticalPoint>& crits,
                           Eigen::Index column = 0);

}  // namespace morseflow::linearization
