#include "morseflow/linearization.hpp"

#include "adaptive.hpp"

#include <algorithm>
#include <cmath>

namespace morseflow::linearization {

flow::Trajectory VariationalSeries::base() const {
  flow::Trajectory t;
  t.terminal = terminal;
  t.limit_id = limit_id;
  t.direction = direction;
  t.stats = stats;
  t.samples.reserve(samples.size());
  for (const auto& s : samples) t.samples.push_back({s.t, s.x, s.f, s.grad_norm});
  return t;
}

Vector field_derivative(const geometry::ImplicitManifold& m, const symbolics::Expression& f, const Vector& x,
                        const Vector& v) {
  const double vn = v.norm();
  if (vn == 0) return Vector::Zero(x.size());
  const Vector dir = v / vn;
  const double h = kDirectionalStep * std::max(1.0, x.norm());
  const Vector plus = geometry::gradient_field(m, f, x + h * dir);
  const Vector minus = geometry::gradient_field(m, f, x - h * dir);
  return (plus - minus) * (vn / (2 * h));
}

VariationalSeries integrate_variational(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                                        const Vector& x0, const Matrix& v0, const flow::FlowConfig& cfg,
                                        const std::vector<morse::CriticalPoint>& crits,
                                        flow::Direction direction) {
  cfg.validate();
  const Eigen::Index n = m.ambient_dim();
  if (x0.size() != n || v0.rows() != n) throw PreconditionError("integrate_variational: dimension mismatch");
  if (!m.on_manifold(x0)) throw PreconditionError("integrate_variational: start point is not on the manifold");
  for (Eigen::Index j = 0; j < v0.cols(); ++j) {
    const double scale = std::max(1.0, v0.col(j).norm());
    if (geometry::tangency_residual(m, x0, v0.col(j)) > 1e-8 * scale)
      throw PreconditionError("integrate_variational: initial vector is not tangent");
  }
  const Eigen::Index k = v0.cols();
  const double sign = direction == flow::Direction::Forward ? -1.0 : 1.0;

  VariationalSeries series;
  series.direction = direction;
  auto make_sample = [&](double t, const Vector& x, const Matrix& vs) {
    return VariationalSample{t, x, f.value(x), geometry::gradient_field(m, f, x).norm(), vs};
  };
  series.samples.push_back(make_sample(0.0, x0, v0));
  series.stats.max_constraint_drift = m.constraint_residual(x0);

  auto capture = [&](const VariationalSample& s) {
    if (!cfg.stop_at_capture || s.grad_norm >= cfg.capture_grad_tol) return false;
    const int id = morse::nearest_critical_point(crits, s.x, cfg.capture_radius);
    series.terminal = id >= 0 ? flow::Terminal::Converged : flow::Terminal::Stalled;
    series.limit_id = id;
    return true;
  };
  if (capture(series.samples.front())) return series;

  // state = [x; V_1; ...; V_k]
  Vector y0(n * (k + 1));
  y0.head(n) = x0;
  for (Eigen::Index j = 0; j < k; ++j) y0.segment(n * (j + 1), n) = v0.col(j);

  auto rhs = [&](const Vector& y) -> Vector {
    Vector dy(y.size());
    const Vector x = y.head(n);
    dy.head(n) = sign * geometry::gradient_field(m, f, x);
    for (Eigen::Index j = 0; j < k; ++j)
      dy.segment(n * (j + 1), n) = sign * field_derivative(m, f, x, y.segment(n * (j + 1), n));
    return dy;
  };
  auto error_norm = [&](const Vector& y, const Vector& yn, const Vector& err) {
    double e = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::fabs(y(i)), std::fabs(yn(i)));
      e = std::max(e, std::fabs(err(i)) / sc);
    }
    // V is linear in v0: control its error relative to its own size.
    for (Eigen::Index j = 0; j < k; ++j) {
      const double vn = std::max(y.segment(n * (j + 1), n).lpNorm<Eigen::Infinity>(),
                                 yn.segment(n * (j + 1), n).lpNorm<Eigen::Infinity>());
      if (vn == 0) continue;
      e = std::max(e, err.segment(n * (j + 1), n).lpNorm<Eigen::Infinity>() / (cfg.rel_tol * vn));
    }
    return e;
  };
  auto project = [&](const Vector& yn) -> Vector {
    Vector out = yn;
    const Vector x = geometry::retract(m, yn.head(n));
    out.head(n) = x;
    const Matrix p = geometry::tangent_projector(m, x);
    const Matrix j = m.jacobian(x);
    for (Eigen::Index c = 0; c < k; ++c) {
      auto v = out.segment(n * (c + 1), n);
      const double vn = v.norm();
      if (vn > 0) series.max_tangency_drift = std::max(series.max_tangency_drift, (j * v).norm() / vn);
      v = p * v;
    }
    return out;
  };
  auto on_accept = [&](double t, const Vector& y) {
    Matrix vs(n, k);
    for (Eigen::Index j = 0; j < k; ++j) vs.col(j) = y.segment(n * (j + 1), n);
    VariationalSample s = make_sample(t, y.head(n), vs);
    series.stats.max_constraint_drift = std::max(series.stats.max_constraint_drift, m.constraint_residual(s.x));
    const double prev = series.samples.back().f;
    if (direction == flow::Direction::Forward ? s.f > prev + 1e-12 : s.f < prev - 1e-12)
      ++series.stats.monotonicity_violations;
    series.samples.push_back(std::move(s));
    return capture(series.samples.back());
  };

  detail::AdaptiveResult res = detail::run_adaptive(y0, cfg, rhs, error_norm, project, on_accept);
  series.stats.steps = res.steps;
  series.stats.rejected = res.rejected;
  series.stats.retraction_halvings = res.halvings;
  if (!res.stopped) series.terminal = flow::Terminal::MaxTimeReached;
  return series;
}

EnergyCheck check_energy_ode(const VariationalSeries& series, const geometry::ImplicitManifold& m,
                             const symbolics::Expression& f, Eigen::Index column) {
  const auto& s = series.samples;
  if (s.size() < 3) throw PreconditionError("check_energy_ode: series needs at least 3 samples");
  const double sign = series.direction == flow::Direction::Forward ? -1.0 : 1.0;
  EnergyCheck out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    const double h1 = s[i].t - s[i - 1].t;
    const double h2 = s[i + 1].t - s[i].t;
    const double e0 = s[i - 1].energy(column), e1 = s[i].energy(column), e2 = s[i + 1].energy(column);
    const double de = -h2 / (h1 * (h1 + h2)) * e0 + (h2 - h1) / (h1 * h2) * e1 + h1 / (h2 * (h1 + h2)) * e2;
    if (!(std::fabs(de) > 1e-10)) continue;
    const Vector v = s[i].vectors.col(column);
    const double form = v.dot(geometry::hessian_form(m, f, s[i].x) * v);
    const double predicted = sign * form;
    out.max_relative_residual = std::max(out.max_relative_residual, std::fabs(de - predicted) / std::fabs(de));
    ++out.samples_checked;
    if (e1 > 0) out.rate_ratio.push_back(-de / (2 * e1));
  }
  return out;
}

DecayReport fit_decay_rate(const VariationalSeries& series, const std::vector<morse::CriticalPoint>& crits,
                           Eigen::Index column) {
  if (series.terminal != flow::Terminal::Converged || series.limit_id < 0 ||
      series.limit_id >= static_cast<int>(crits.size()))
    throw PreconditionError("fit_decay_rate: base trajectory did not converge to a registered critical point");
  const morse::CriticalPoint& limit = crits[static_cast<std::size_t>(series.limit_id)];
  if (limit.index != 0) throw PreconditionError("fit_decay_rate: limit point is not a minimum");

  const std::size_t n = series.samples.size();
  const auto lo = static_cast<std::size_t>(std::floor(0.6 * static_cast<double>(n)));
  const auto hi = static_cast<std::size_t>(std::floor(0.95 * static_cast<double>(n)));
  if (hi <= lo || hi - lo < 20) throw PreconditionError("fit_decay_rate: fit window has fewer than 20 samples");

  double st = 0, sy = 0, stt = 0, sty = 0;
  std::vector<double> ts, ys;
  for (std::size_t i = lo; i < hi; ++i) {
    const double vn = series.samples[i].vectors.col(column).norm();
    if (!(vn > 0)) throw PreconditionError("fit_decay_rate: |V| vanished inside the fit window");
    ts.push_back(series.samples[i].t);
    ys.push_back(std::log(vn));
  }
  const double cnt = static_cast<double>(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  const double slope = (cnt * sty - st * sy) / (cnt * stt - st * st);
  const double intercept = (sy - slope * st) / cnt;
  double rss = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ys[i] - (intercept + slope * ts[i]);
    rss += r * r;
  }

  DecayReport rep;
  rep.c_fit = -slope;
  rep.c_pred = limit.eigenvalues(0);
  rep.fit_window = {ts.front(), ts.back()};
  rep.residual = std::sqrt(rss / cnt);
  rep.relative_gap = std::fabs(rep.c_fit - rep.c_pred) / rep.c_pred;
  rep.limit_id = limit.id;
  rep.fit_samples = ts.size();
  return rep;
}

}  // namespace morseflow::linearization
