#pragma once

// Negative gradient flow x' = -P(x) grad f(x) on an implicit manifold.

#include "morseflow/geometry.hpp"
#include "morseflow/morse.hpp"

#include <string>
#include <vector>

namespace morseflow::flow {

using geometry::Vector;

enum class Direction { Forward, Backward };

/// Converged: captured by a registered critical point.
/// MaxTimeReached: t reached t_max first (also the normal end of fixed-time runs).
/// Stalled: |grad f| fell below the capture threshold away from every
/// registered critical point, i.e. the census missed one.
enum class Terminal { Converged, MaxTimeReached, Stalled };

std::string to_string(Terminal t);

struct FlowSample {
  double t = 0;
  Vector x;
  double f = 0;
  double grad_norm = 0;
};

struct TrajectoryStats {
  int steps = 0;
  int rejected = 0;
  int retraction_halvings = 0;
  int monotonicity_violations = 0;
  double max_constraint_drift = 0;
};

struct Trajectory {
  std::vector<FlowSample> samples;
  Terminal terminal = Terminal::MaxTimeReached;
  int limit_id = -1;
  Direction direction = Direction::Forward;
  TrajectoryStats stats;
};

struct FlowConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double t_max = 200;
  double capture_grad_tol = 1e-7;
  double capture_radius = 1e-3;
  double max_step = 0.05;
  double initial_step = 1e-3;
  bool stop_at_capture = true;

  /// Defaults with capture_radius = min(r/2, 1e-3).
  static FlowConfig for_constants(const morse::GeometricConstants& consts);
  /// Throws PreconditionError unless every field is positive (and
  /// capture_radius < r when r > 0 is given).
  void validate(double r = 0) const;
};

Trajectory integrate_flow(const geometry::ImplicitManifold& m, const symbolics::Expression& f, const Vector& x0,
                          const FlowConfig& cfg, const std::vector<morse::CriticalPoint>& crits,
                          Direction direction = Direction::Forward);

/// Id of the critical point that captured the trajectory. Throws
/// UnregisteredCriticalPoint for Stalled runs and PreconditionError for
/// runs that hit t_max.
int limit_point(const Trajectory& traj, const std::vector<morse::CriticalPoint>& crits);

struct LengthSegment {
  std::size_t first = 0;  // sample indices, inclusive
  std::size_t last = 0;
  double length = 0;      // polyline length
  double drop = 0;        // |f(first) - f(last)|
  double bound = 0;       // drop / c_floor * slack
  bool pass = true;
};

struct LengthBoundReport {
  double lhs = 0;  // total polyline length outside the balls
  double rhs = 0;  // total drop / c_floor
  bool pass = true;
  std::vector<LengthSegment> segments;
};

/// Length of each maximal run of samples outside every B(q, r/2) against
/// the drop of f along it divided by c_floor (with `slack`).
LengthBoundReport check_length_bound(const Trajectory& traj, const std::vector<morse::CriticalPoint>& crits,
                                     const morse::GeometricConstants& consts, double slack = 1.05);

/// retract(p +- eps e) for each negative-curvature eigenvector e; empty for minima.
std::vector<Vector> unstable_seeds(const geometry::ImplicitManifold& m, const morse::CriticalPoint& p,
                                   double eps = 1e-4);

/// Trapezoid integral of |grad f|^2 over the samples.
double dissipated_energy(const Trajectory& traj);

}  // namespace morseflow::flow
