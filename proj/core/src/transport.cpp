#include "morseflow/transport.hpp"

#include "morseflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace morseflow::transport {

namespace {

double identity_deviation(const Matrix& w) {
  return (w.transpose() * w - Matrix::Identity(w.cols(), w.cols())).cwiseAbs().maxCoeff();
}

// Orthonormal tangent frame at x whose first columns are the given
// orthonormal tangent vectors.
Matrix completed_frame(const geometry::ImplicitManifold& m, const Vector& x, const std::vector<Vector>& lead) {
  const Matrix basis = geometry::tangent_basis(m, x);
  const int d = m.dim();
  Matrix frame(m.ambient_dim(), d);
  int k = 0;
  for (const auto& v : lead) frame.col(k++) = v;
  std::vector<bool> used(static_cast<std::size_t>(d), false);
  while (k < d) {
    int best = -1;
    double best_norm = -1;
    Vector best_vec;
    for (int i = 0; i < d; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      Vector w = basis.col(i);
      for (int pass = 0; pass < 2; ++pass)
        for (int c = 0; c < k; ++c) w -= frame.col(c).dot(w) * frame.col(c);
      if (w.norm() > best_norm) {
        best_norm = w.norm();
        best = i;
        best_vec = w;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    frame.col(k++) = best_vec / best_norm;
  }
  return frame;
}

Matrix holonomy_operator(const geometry::ImplicitManifold& m, const Vector& x, const Vector& u, const Vector& v,
                         const Matrix& frame, double h, int substeps, double& gram_deviation) {
  const Vector corners[5] = {x, x + h * u, x + h * u + h * v, x + h * v, x};
  std::vector<Vector> path;
  path.push_back(x);
  for (int leg = 0; leg < 4; ++leg) {
    for (int j = 1; j <= substeps; ++j) {
      const double s = static_cast<double>(j) / substeps;
      if (leg == 3 && j == substeps) {
        path.push_back(x);
      } else {
        path.push_back(geometry::retract(m, corners[leg] + s * (corners[leg + 1] - corners[leg])));
      }
    }
  }
  TransportedFrame tf = parallel_transport(m, path, frame, 1);
  gram_deviation = std::max(gram_deviation, tf.max_gram_deviation);
  const Matrix hol = frame.transpose() * tf.frames.back();
  return (Matrix::Identity(frame.cols(), frame.cols()) - hol) / (h * h);
}

}  // namespace

TransportedFrame parallel_transport(const geometry::ImplicitManifold& m, const std::vector<Vector>& path,
                                    const Matrix& frame0, int substeps) {
  if (path.empty()) throw PreconditionError("parallel_transport: empty path");
  if (substeps < 1) throw PreconditionError("parallel_transport: substeps must be at least 1");
  if (identity_deviation(frame0) > 1e-8) throw PreconditionError("parallel_transport: frame is not orthonormal");
  for (Eigen::Index j = 0; j < frame0.cols(); ++j)
    if (geometry::tangency_residual(m, path.front(), frame0.col(j)) > 1e-8)
      throw PreconditionError("parallel_transport: frame is not tangent at the path start");

  TransportedFrame out;
  const Matrix gram0 = frame0.transpose() * frame0;
  out.points.push_back(path.front());
  out.frames.push_back(frame0);
  Matrix w = frame0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    for (int j = 1; j <= substeps; ++j) {
      Vector y;
      if (j == substeps) {
        y = path[i + 1];
      } else {
        const double s = static_cast<double>(j) / substeps;
        y = geometry::retract(m, path[i] + s * (path[i + 1] - path[i]));
      }
      const Matrix projected = geometry::tangent_projector(m, y) * w;
      out.max_step_deviation = std::max(out.max_step_deviation, identity_deviation(projected));
      w = linalg::orthonormal_polar(projected);
    }
    out.points.push_back(path[i + 1]);
    out.frames.push_back(w);
    out.max_gram_deviation =
        std::max(out.max_gram_deviation, (w.transpose() * w - gram0).cwiseAbs().maxCoeff());
  }
  return out;
}

TransportedFrame parallel_transport(const geometry::ImplicitManifold& m, const flow::Trajectory& traj,
                                    const Matrix& frame0, int substeps) {
  std::vector<Vector> path;
  path.reserve(traj.samples.size());
  for (const auto& s : traj.samples) path.push_back(s.x);
  return parallel_transport(m, path, frame0, substeps);
}

CurvatureSample holonomy_curvature(const geometry::ImplicitManifold& m, const Vector& x, const Vector& u,
                                   const Vector& v, const HolonomyOptions& opts) {
  if (!(opts.h >= 1e-3 && opts.h <= 1e-1)) throw PreconditionError("holonomy_curvature: h must lie in [1e-3, 1e-1]");
  if (std::fabs(u.norm() - 1) > 1e-8 || std::fabs(v.norm() - 1) > 1e-8 ||
      geometry::tangency_residual(m, x, u) > 1e-8 || geometry::tangency_residual(m, x, v) > 1e-8)
    throw PreconditionError("holonomy_curvature: u and v must be unit tangent vectors");
  const double uv = u.dot(v);
  if (std::fabs(uv) > 1e-8 && std::fabs(std::fabs(uv) - 1) > 1e-8)
    throw PreconditionError("holonomy_curvature: u and v must be orthonormal or equal");

  CurvatureSample s;
  s.x = x;
  s.u = u;
  s.v = v;
  // u = +-v spans no plane; the frame is completed from u alone.
  s.frame = std::fabs(uv) > 0.5 ? completed_frame(m, x, {u}) : completed_frame(m, x, {u, v});
  try {
    const Matrix r1 = holonomy_operator(m, x, u, v, s.frame, opts.h, opts.substeps, s.gram_deviation);
    const Matrix r2 = holonomy_operator(m, x, u, v, s.frame, opts.h / 2, opts.substeps, s.gram_deviation);
    const Matrix r4 = holonomy_operator(m, x, u, v, s.frame, opts.h / 4, opts.substeps, s.gram_deviation);
    s.op = (8.0 * r4 - 6.0 * r2 + r1) / 3.0;
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(std::string("holonomy loop left the retraction basin (h too large): ") + e.what());
  }
  s.norm = linalg::spectral_norm(s.op);
  s.sectional = u.dot(s.ambient() * v);
  return s;
}

Matrix pulled_back_curvature(const geometry::ImplicitManifold& m, const symbolics::Expression& f, const Vector& x,
                             const Vector& u, const Vector& v, double t, const InvarianceOptions& opts) {
  const Matrix basis0 = geometry::tangent_basis(m, x);
  if (t == 0) {
    const CurvatureSample s0 = holonomy_curvature(m, x, u, v, opts.holonomy);
    return basis0.transpose() * s0.ambient() * basis0;
  }
  flow::FlowConfig cfg = opts.flow;
  cfg.t_max = std::fabs(t);
  cfg.stop_at_capture = false;
  Matrix v0(m.ambient_dim(), 2);
  v0.col(0) = u;
  v0.col(1) = v;
  const auto dir = t > 0 ? flow::Direction::Forward : flow::Direction::Backward;
  const linearization::VariationalSeries series = linearization::integrate_variational(m, f, x, v0, cfg, {}, dir);
  const auto& last = series.samples.back();

  // R(U, V) = a c R(e1, e2) for U = a e1, V = b e1 + c e2.
  const Vector pu = last.vectors.col(0);
  const Vector pv = last.vectors.col(1);
  const double a = pu.norm();
  const Vector e1 = pu / a;
  const Vector w = pv - pv.dot(e1) * e1;
  const double c = w.norm();
  Matrix ambient = Matrix::Zero(m.ambient_dim(), m.ambient_dim());
  if (a > 0 && c > 1e-14 * std::max(1.0, pv.norm())) {
    const CurvatureSample st = holonomy_curvature(m, last.x, e1, w / c, opts.holonomy);
    ambient = (a * c) * st.ambient();
  }
  const TransportedFrame tf = parallel_transport(m, series.base(), basis0, opts.transport_substeps);
  const Matrix& bt = tf.frames.back();
  return bt.transpose() * ambient * bt;
}

double flow_invariance_defect(const geometry::ImplicitManifold& m, const symbolics::Expression& f, const Vector& x,
                              const Vector& u, const Vector& v, double t, const InvarianceOptions& opts) {
  if (t < 0) throw PreconditionError("flow_invariance_defect: t must be non-negative");
  const Matrix r0 = pulled_back_curvature(m, f, x, u, v, 0.0, opts);
  if (t == 0) return 0.0;
  const Matrix rt = pulled_back_curvature(m, f, x, u, v, t, opts);
  return linalg::spectral_norm(r0 - rt);
}

double lie_derivative_estimate(const geometry::ImplicitManifold& m, const symbolics::Expression& f, const Vector& x,
                               const Vector& u, const Vector& v, double h_t, const InvarianceOptions& opts) {
  if (!(h_t > 0)) throw PreconditionError("lie_derivative_estimate: h_t must be positive");
  const Matrix plus = pulled_back_curvature(m, f, x, u, v, h_t, opts);
  const Matrix minus = pulled_back_curvature(m, f, x, u, v, -h_t, opts);
  return linalg::spectral_norm((plus - minus) / (2 * h_t));
}

std::pair<Vector, Vector> random_tangent_plane(const geometry::ImplicitManifold& m, const Vector& x,
                                               std::uint64_t seed) {
  const Matrix basis = geometry::tangent_basis(m, x);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (;;) {
    Vector a(basis.cols()), b(basis.cols());
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = gauss(rng);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = gauss(rng);
    Vector u = basis * a;
    Vector v = basis * b;
    if (u.norm() < 1e-3) continue;
    u.normalize();
    v -= v.dot(u) * u;
    if (v.norm() < 1e-3) continue;
    v.normalize();
    return {u, v};
  }
}

FlatnessVerdict flatness_test(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                              const std::vector<morse::CriticalPoint>& crits, std::size_t sample_count,
                              std::uint64_t seed, const InvarianceOptions& opts) {
  if (!morse::is_morse(crits)) throw PreconditionError("flatness_test: f is not a Morse function on this scenario");
  if (m.dim() < 2) throw PreconditionError("flatness_test: manifold dimension must be at least 2");
  FlatnessVerdict verdict;
  const std::vector<Vector> points = geometry::sample_points(m, sample_count, seed);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [u, v] = random_tangent_plane(m, points[i], seed * 7919 + i);
    FlatnessSample s;
    s.x = points[i];
    s.curvature_norm = holonomy_curvature(m, points[i], u, v, opts.holonomy).norm;
    s.lie_derivative_norm = lie_derivative_estimate(m, f, points[i], u, v, 1e-3, opts);
    verdict.curvature_max = std::max(verdict.curvature_max, s.curvature_norm);
    verdict.lie_derivative_max = std::max(verdict.lie_derivative_max, s.lie_derivative_norm);
    verdict.samples.push_back(std::move(s));
  }
  verdict.consistent = !(verdict.lie_derivative_max < verdict.floor && verdict.curvature_max > 10 * verdict.floor);
  return verdict;
}

}  // namespace morseflow::transport
