#pragma once

// Embedded manifolds M = F^{-1}(0) in R^n with the induced metric.

#include "morseflow/symbolics.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace morseflow::geometry {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned ambient box used for rejection sampling of manifold points.
struct Box {
  Vector lo;
  Vector hi;
};

class ImplicitManifold {
 public:
  static constexpr double kDefaultConstraintTol = 1e-9;
  static constexpr double kDefaultRankTol = 1e-6;

  ImplicitManifold(int ambient_dim, std::vector<symbolics::Expression> constraints, Box box = {},
                   double constraint_tol = kDefaultConstraintTol, double rank_tol = kDefaultRankTol);

  int ambient_dim() const noexcept { return ambient_dim_; }
  int codim() const noexcept { return static_cast<int>(constraints_.size()); }
  int dim() const noexcept { return ambient_dim_ - codim(); }
  const std::vector<symbolics::Expression>& constraints() const noexcept { return constraints_; }
  const Box& box() const noexcept { return box_; }
  double constraint_tol() const noexcept { return constraint_tol_; }
  double rank_tol() const noexcept { return rank_tol_; }

  Vector constraint_values(const Vector& x) const;
  /// Max-norm of F(x).
  double constraint_residual(const Vector& x) const;
  /// k x n constraint Jacobian.
  Matrix jacobian(const Vector& x) const;
  /// Smallest singular value of the Jacobian.
  double jacobian_min_singular(const Vector& x) const;
  bool on_manifold(const Vector& x) const;

 private:
  int ambient_dim_;
  std::vector<symbolics::Expression> constraints_;
  Box box_;
  double constraint_tol_;
  double rank_tol_;
};

struct TangentVector {
  Vector base;
  Vector vec;
};

/// |J(base) vec|.
double tangency_residual(const ImplicitManifold& m, const Vector& base, const Vector& vec);

/// P = I - J^T (J J^T)^{-1} J. Throws RankDeficiencyError.
Matrix tangent_projector(const ImplicitManifold& m, const Vector& x);

/// P(x) grad f(x).
TangentVector riemannian_gradient(const ImplicitManifold& m, const symbolics::Expression& f, const Vector& x);

/// Same vector as riemannian_gradient(...).vec without the wrapper; this is
/// the flow field evaluated by the integrators.
Vector gradient_field(const ImplicitManifold& m, const symbolics::Expression& f, const Vector& x);

/// Least-squares multipliers solving J^T lambda = grad f.
Vector lagrange_multipliers(const ImplicitManifold& m, const Vector& grad_f, const Vector& x);

/// Ambient matrix W = Hess f - sum_a lambda_a Hess F_a with least-squares
/// multipliers. Restricted to tangent vectors, v^T W w is the Riemannian
/// Hessian of f on M.
Matrix hessian_form(const ImplicitManifold& m, const symbolics::Expression& f, const Vector& x);

/// Minimal-norm Gauss-Newton iteration y <- y - J^T (J J^T)^{-1} F(y) onto F = 0.
/// Points already within constraint_tol are returned unchanged. Convergence
/// is expected for |F(x)| < 0.1; larger residuals are attempted anyway.
/// Throws ConvergenceError after 25 iterations.
Vector retract(const ImplicitManifold& m, const Vector& x);

/// Orthonormal basis of ker J(x) as the columns of an n x dim matrix, built
/// by Gram-Schmidt on the projected coordinate axes, taking at each step the
/// axis with the largest remaining component (ties to the lower index).
Matrix tangent_basis(const ImplicitManifold& m, const Vector& x);

/// Rejection sampling: uniform points in the box with |F| < 0.5, retracted.
/// Deterministic in `seed`.
std::vector<Vector> sample_points(const ImplicitManifold& m, std::size_t count, std::uint64_t seed);

}  // namespace morseflow::geometry
