#pragma once

// Critical point census of a function on an implicit manifold.

#include "morseflow/error.hpp"
#include "morseflow/geometry.hpp"
#include "morseflow/linalg.hpp"

#include <cstdint>
#include <vector>

namespace morseflow::morse {

using geometry::Matrix;
using geometry::Vector;

struct CriticalPoint {
  int id = 0;
  Vector location;
  double value = 0;
  int index = 0;
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // ambient, one tangent unit vector per column
  double nondegeneracy_margin = 0;
  double gradient_norm = 0;
  bool degenerate = false;
};

struct CensusOptions {
  double grad_tol = 1e-8;
  double degenerate_tol = 1e-6;
  double dedupe_radius = 1e-5;
  int max_newton_iterations = 60;
};

struct Census {
  std::vector<CriticalPoint> points;  // ids ascending with critical value
  int starts = 0;
  int converged = 0;
  int discarded = 0;  // starts whose Newton iteration failed
};

/// Multi-start Riemannian Newton on the tangent-basis-reduced gradient.
/// Half of the starts are the lowest-gradient points of a larger uniform
/// sample, the rest are uniform samples.
Census find_critical_points(const geometry::ImplicitManifold& m, const symbolics::Expression& f, int n_starts,
                            std::uint64_t seed, const CensusOptions& options = {});

struct IntrinsicHessian {
  Matrix basis;   // n x dim tangent basis
  Matrix matrix;  // dim x dim
  linalg::SymmetricEigen eigen;
};

/// Lagrange-corrected Hessian in the tangent basis. Throws PreconditionError
/// if |riemannian gradient| > grad_tol at p.
IntrinsicHessian intrinsic_hessian(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                                   const Vector& p, double grad_tol = 1e-8);

struct GeometricConstants {
  double r = 0;          // half the minimum pairwise separation
  double c_floor = 0;    // min |grad f| over samples outside all B(q, r/2)
  std::size_t samples_outside = 0;
};

/// Raised when fewer than two critical points are given; carries the
/// manifold-wide sampled gradient floor instead.
class InsufficientCriticalPoints : public PreconditionError {
 public:
  explicit InsufficientCriticalPoints(double floor)
      : PreconditionError("at least two critical points are needed for the separation radius"),
        gradient_floor_(floor) {}
  double gradient_floor() const noexcept { return gradient_floor_; }

 private:
  double gradient_floor_;
};

GeometricConstants geometric_constants(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                                       const std::vector<CriticalPoint>& crits, std::size_t n_samples,
                                       std::uint64_t seed);

/// Sum of (-1)^index.
int euler_characteristic(const std::vector<CriticalPoint>& crits);

/// True when the census is non-empty and no point is flagged degenerate.
bool is_morse(const std::vector<CriticalPoint>& crits);

/// Id of the critical point closest to x when within `radius`, else -1.
int nearest_critical_point(const std::vector<CriticalPoint>& crits, const Vector& x, double radius);

}  // namespace morseflow::morse
