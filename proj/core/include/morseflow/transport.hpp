#pragma once

// Levi-Civita parallel transport on implicit manifolds, curvature from
// holonomy, and flow invariance of the curvature operator.

#include "morseflow/flow.hpp"
#include "morseflow/linearization.hpp"

#include <cstdint>
#include <vector>

namespace morseflow::transport {

using geometry::Matrix;
using geometry::Vector;

struct TransportedFrame {
  std::vector<Vector> points;
  std::vector<Matrix> frames;          // n x d, one per point
  double max_gram_deviation = 0;       // max |W^T W - W0^T W0| over the path
  double max_step_deviation = 0;       // max |W^T W - I| before re-orthonormalization
};

/// Transports the columns of frame0 along a polyline of manifold points. Each
/// step projects the frame onto the next tangent space and restores
/// orthonormality with the polar factor (the minimal rotation between the
/// tangent spaces). `substeps` retracted points are inserted per segment.
TransportedFrame parallel_transport(const geometry::ImplicitManifold& m, const std::vector<Vector>& path,
                                    const Matrix& frame0, int substeps = 1);

TransportedFrame parallel_transport(const geometry::ImplicitManifold& m, const flow::Trajectory& traj,
                                    const Matrix& frame0, int substeps = 1);

struct HolonomyOptions {
  double h = 0.05;    // loop side, in [1e-3, 1e-1]
  int substeps = 16;  // retracted points per loop leg
};

struct CurvatureSample {
  Vector x;
  Vector u;
  Vector v;
  Matrix frame;      // n x d orthonormal tangent frame, first columns u, v
  Matrix op;         // d x d matrix of R(u, v) in `frame`
  double norm = 0;   // operator 2-norm
  double sectional = 0;  // <R(u, v) v, u>
  double gram_deviation = 0;  // worst Gram drift of the loop transports

  /// R(u, v) as an ambient n x n operator vanishing on the normal space.
  Matrix ambient() const { return frame * op * frame.transpose(); }
};

/// (I - holonomy) / h^2 around the retracted loop x, x+hu, x+hu+hv, x+hv,
/// extrapolated over h, h/2, h/4 to cancel the O(h) and O(h^2) error terms.
CurvatureSample holonomy_curvature(const geometry::ImplicitManifold& m, const Vector& x, const Vector& u,
                                   const Vector& v, const HolonomyOptions& opts = {});

struct InvarianceOptions {
  HolonomyOptions holonomy;
  int transport_substeps = 4;
  flow::FlowConfig flow;  // flow.t_max and capture fields are overridden
};

/// Curvature operator at phi_t(x) on (d phi_t u, d phi_t v), conjugated back
/// to T_x M by inverse parallel transport along the flow line, expressed in
/// tangent_basis(x). Negative t flows backward.
Matrix pulled_back_curvature(const geometry::ImplicitManifold& m, const symbolics::Expression& f, const Vector& x,
                             const Vector& u, const Vector& v, double t, const InvarianceOptions& opts = {});

/// Operator norm of R_x(u, v) minus the pulled-back operator at time t.
double flow_invariance_defect(const geometry::ImplicitManifold& m, const symbolics::Expression& f, const Vector& x,
                              const Vector& u, const Vector& v, double t, const InvarianceOptions& opts = {});

/// Central difference at t = +-h_t of the pulled-back curvature operator;
/// returns the operator norm of the derivative estimate.
double lie_derivative_estimate(const geometry::ImplicitManifold& m, const symbolics::Expression& f, const Vector& x,
                               const Vector& u, const Vector& v, double h_t = 1e-3,
                               const InvarianceOptions& opts = {});

struct FlatnessSample {
  Vector x;
  double curvature_norm = 0;
  double lie_derivative_norm = 0;
};

struct FlatnessVerdict {
  std::vector<FlatnessSample> samples;
  double lie_derivative_max = 0;
  double curvature_max = 0;
  double floor = 1e-2;
  /// No numerical counterexample: NOT(lie max < floor AND curvature max > 10 floor).
  bool consistent = true;
};

/// Refuses (PreconditionError) unless the census is Morse.
FlatnessVerdict flatness_test(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                              const std::vector<morse::CriticalPoint>& crits, std::size_t sample_count,
                              std::uint64_t seed, const InvarianceOptions& opts = {});

/// Random orthonormal tangent pair at x drawn from the generator.
std::pair<Vector, Vector> random_tangent_plane(const geometry::ImplicitManifold& m, const Vector& x,
                                               std::uint64_t seed);

}  // namespace morseflow::transport
