#pragma once

// Dormand-Prince 5(4) embedded Runge-Kutta pair.

#include <Eigen/Core>

#include <cmath>

namespace morseflow::ode {

namespace dp {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b* (fifth minus fourth order weights)
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace dp

/// One Dormand-Prince step of an autonomous system y' = rhs(y). Writes the
/// fifth-order solution and the embedded error estimate.
template <typename Rhs>
void dopri_step(const Rhs& rhs, const Eigen::VectorXd& y, double h, Eigen::VectorXd& y_next,
                Eigen::VectorXd& error) {
  using namespace dp;
  const Eigen::VectorXd k1 = rhs(y);
  const Eigen::VectorXd k2 = rhs((y + h * a21 * k1).eval());
  const Eigen::VectorXd k3 = rhs((y + h * (a31 * k1 + a32 * k2)).eval());
  const Eigen::VectorXd k4 = rhs((y + h * (a41 * k1 + a42 * k2 + a43 * k3)).eval());
  const Eigen::VectorXd k5 = rhs((y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)).eval());
  const Eigen::VectorXd k6 = rhs((y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)).eval());
  y_next = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Eigen::VectorXd k7 = rhs(y_next);
  error = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
}

/// Standard step-size update for a fifth-order pair given the scaled error.
inline double next_step_factor(double err) {
  if (!(err > 0)) return 5.0;
  const double f = 0.9 * std::pow(err, -0.2);
  return std::fmin(5.0, std::fmax(0.2, f));
}

}  // namespace morseflow::ode
