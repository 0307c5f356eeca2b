#include "morseflow/flow.hpp"

#include "adaptive.hpp"

#include <algorithm>
#include <cmath>

namespace morseflow::flow {

std::string to_string(Terminal t) {
  switch (t) {
    case Terminal::Converged: return "converged";
    case Terminal::MaxTimeReached: return "max_time_reached";
    case Terminal::Stalled: return "stalled";
  }
  return "unknown";
}

FlowConfig FlowConfig::for_constants(const morse::GeometricConstants& consts) {
  FlowConfig cfg;
  cfg.capture_radius = std::min(0.5 * consts.r, 1e-3);
  return cfg;
}

void FlowConfig::validate(double r) const {
  for (double v : {rel_tol, abs_tol, t_max, capture_grad_tol, capture_radius, max_step, initial_step})
    if (!(v > 0)) throw PreconditionError("flow configuration values must be positive");
  if (r > 0 && !(capture_radius < r)) throw PreconditionError("capture_radius must be smaller than r");
}

namespace {

FlowSample make_sample(const geometry::ImplicitManifold& m, const symbolics::Expression& f, double t,
                       const Vector& x) {
  return {t, x, f.value(x), geometry::gradient_field(m, f, x).norm()};
}

}  // namespace

Trajectory integrate_flow(const geometry::ImplicitManifold& m, const symbolics::Expression& f, const Vector& x0,
                          const FlowConfig& cfg, const std::vector<morse::CriticalPoint>& crits,
                          Direction direction) {
  cfg.validate();
  if (!m.on_manifold(x0)) throw PreconditionError("integrate_flow: start point is not on the manifold");
  const double sign = direction == Direction::Forward ? -1.0 : 1.0;

  Trajectory traj;
  traj.direction = direction;
  traj.samples.push_back(make_sample(m, f, 0.0, x0));
  traj.stats.max_constraint_drift = m.constraint_residual(x0);

  auto capture = [&](const FlowSample& s) {
    if (!cfg.stop_at_capture || s.grad_norm >= cfg.capture_grad_tol) return false;
    const int id = morse::nearest_critical_point(crits, s.x, cfg.capture_radius);
    if (id >= 0) {
      traj.terminal = Terminal::Converged;
      traj.limit_id = id;
    } else {
      traj.terminal = Terminal::Stalled;
    }
    return true;
  };
  if (capture(traj.samples.front())) return traj;

  auto rhs = [&](const Vector& x) -> Vector { return sign * geometry::gradient_field(m, f, x); };
  auto error_norm = [&](const Vector& y, const Vector& yn, const Vector& err) {
    double e = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::fabs(y(i)), std::fabs(yn(i)));
      e = std::max(e, std::fabs(err(i)) / sc);
    }
    return e;
  };
  auto project = [&](const Vector& yn) { return geometry::retract(m, yn); };
  auto on_accept = [&](double t, const Vector& x) {
    FlowSample s = make_sample(m, f, t, x);
    traj.stats.max_constraint_drift = std::max(traj.stats.max_constraint_drift, m.constraint_residual(x));
    const double prev = traj.samples.back().f;
    if (direction == Direction::Forward ? s.f > prev + 1e-12 : s.f < prev - 1e-12)
      ++traj.stats.monotonicity_violations;
    traj.samples.push_back(std::move(s));
    return capture(traj.samples.back());
  };

  detail::AdaptiveResult res = detail::run_adaptive(x0, cfg, rhs, error_norm, project, on_accept);
  traj.stats.steps = res.steps;
  traj.stats.rejected = res.rejected;
  traj.stats.retraction_halvings = res.halvings;
  if (!res.stopped) traj.terminal = Terminal::MaxTimeReached;
  return traj;
}

int limit_point(const Trajectory& traj, const std::vector<morse::CriticalPoint>& crits) {
  switch (traj.terminal) {
    case Terminal::Converged: break;
    case Terminal::Stalled:
      throw UnregisteredCriticalPoint("trajectory stalled away from every registered critical point; "
                                      "re-run find_critical_points");
    case Terminal::MaxTimeReached: throw PreconditionError("trajectory did not converge before t_max");
  }
  if (traj.limit_id < 0 || traj.limit_id >= static_cast<int>(crits.size()))
    throw PreconditionError("trajectory limit id is not in the critical point list");
  return traj.limit_id;
}

LengthBoundReport check_length_bound(const Trajectory& traj, const std::vector<morse::CriticalPoint>& crits,
                                     const morse::GeometricConstants& consts, double slack) {
  LengthBoundReport rep;
  const auto& s = traj.samples;
  auto outside = [&](const Vector& x) {
    return std::all_of(crits.begin(), crits.end(),
                       [&](const morse::CriticalPoint& c) { return (x - c.location).norm() > 0.5 * consts.r; });
  };
  std::size_t i = 0;
  while (i < s.size()) {
    if (!outside(s[i].x)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < s.size() && outside(s[j + 1].x)) ++j;
    if (j > i) {
      LengthSegment seg;
      seg.first = i;
      seg.last = j;
      for (std::size_t k = i; k < j; ++k) seg.length += (s[k + 1].x - s[k].x).norm();
      seg.drop = std::fabs(s[i].f - s[j].f);
      seg.bound = seg.drop / consts.c_floor * slack;
      seg.pass = seg.length <= seg.bound;
      rep.lhs += seg.length;
      rep.rhs += seg.drop / consts.c_floor;
      rep.pass = rep.pass && seg.pass;
      rep.segments.push_back(seg);
    }
    i = j + 1;
  }
  return rep;
}

std::vector<Vector> unstable_seeds(const geometry::ImplicitManifold& m, const morse::CriticalPoint& p, double eps) {
  if (!(eps > 0)) throw PreconditionError("unstable_seeds: eps must be positive");
  std::vector<Vector> seeds;
  for (Eigen::Index k = 0; k < p.eigenvalues.size(); ++k) {
    if (!(p.eigenvalues(k) < 0)) continue;
    const Vector e = p.eigenvectors.col(k);
    seeds.push_back(geometry::retract(m, p.location + eps * e));
    seeds.push_back(geometry::retract(m, p.location - eps * e));
  }
  return seeds;
}

double dissipated_energy(const Trajectory& traj) {
  double acc = 0;
  const auto& s = traj.samples;
  for (std::size_t k = 0; k + 1 < s.size(); ++k)
    acc += 0.5 * (s[k + 1].t - s[k].t) * (s[k].grad_norm * s[k].grad_norm + s[k + 1].grad_norm * s[k + 1].grad_norm);
  return acc;
}

}  // namespace morseflow::flow
