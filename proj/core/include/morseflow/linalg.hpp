#pragma once

#include <Eigen/Core>

#include <string>

namespace morseflow::linalg {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column i pairs with values(i)
  int sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// `off_tol`. Eigenvectors are sign-normalized so that their largest
/// component is positive.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a, double off_tol = 1e-12, int max_sweeps = 100);

/// Closest matrix with orthonormal columns (polar factor U V^T of the thin SVD).
Eigen::MatrixXd orthonormal_polar(const Eigen::MatrixXd& a);

/// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& a);

/// Fixed 17-significant-digit text ("%.17g"), used by every report writer.
std::string format_real(double v);

}  // namespace morseflow::linalg
