#pragma once

// Adaptive project-then-retract driver shared by the flow and variational
// integrators.

#include "morseflow/error.hpp"
#include "morseflow/flow.hpp"
#include "morseflow/ode.hpp"

#include <algorithm>
#include <cmath>

namespace morseflow::detail {

struct AdaptiveResult {
  bool stopped = false;  // on_accept requested termination
  int steps = 0;
  int rejected = 0;
  int halvings = 0;
};

// rhs(y) -> y'; error_norm(y, y_next, err) -> scaled error (accept if <= 1);
// project(y_next) -> state back on the manifold, may throw ConvergenceError;
// on_accept(t, y) -> true to stop.
template <typename Rhs, typename ErrorNorm, typename Project, typename OnAccept>
AdaptiveResult run_adaptive(Eigen::VectorXd y, const flow::FlowConfig& cfg, const Rhs& rhs,
                            const ErrorNorm& error_norm, const Project& project, const OnAccept& on_accept) {
  constexpr int kMaxHalvings = 40;
  constexpr double kMinStep = 1e-14;
  AdaptiveResult res;
  double t = 0;
  double h = std::min(cfg.initial_step, cfg.max_step);
  int halvings_this_step = 0;
  Eigen::VectorXd y_next, err;
  while (cfg.t_max - t > 1e-13 * std::max(1.0, t)) {
    const double remaining = cfg.t_max - t;
    const bool last = h >= remaining;
    const double step = last ? remaining : std::min(h, cfg.max_step);
    ode::dopri_step(rhs, y, step, y_next, err);
    const double e = error_norm(y, y_next, err);
    if (!(e <= 1.0)) {
      ++res.rejected;
      h = step * (std::isfinite(e) ? std::max(0.2, 0.9 * std::pow(e, -0.2)) : 0.2);
      if (h < kMinStep) throw ConvergenceError("step size underflow in adaptive integration");
      continue;
    }
    Eigen::VectorXd projected;
    try {
      projected = project(y_next);
    } catch (const ConvergenceError&) {
      ++res.halvings;
      if (++halvings_this_step > kMaxHalvings)
        throw ConvergenceError("retraction failed after 40 step halvings");
      h = 0.5 * step;
      continue;
    }
    halvings_this_step = 0;
    t = last ? cfg.t_max : t + step;
    y = std::move(projected);
    ++res.steps;
    h = step * ode::next_step_factor(e);
    if (on_accept(t, y)) {
      res.stopped = true;
      return res;
    }
  }
  return res;
}

}  // namespace morseflow::detail
