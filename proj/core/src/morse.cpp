#include "morseflow/morse.hpp"

#include "morseflow/parallel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace morseflow::morse {

namespace {

double newton_step_cap(const geometry::ImplicitManifold& m) {
  const auto& box = m.box();
  if (box.lo.size() == 0) return 0.25;
  return 0.125 * (box.hi - box.lo).minCoeff();
}

struct NewtonResult {
  Vector x;
  double grad_norm;
};

std::optional<NewtonResult> riemannian_newton(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                                              Vector x, const CensusOptions& options, double cap) {
  double best_norm = std::numeric_limits<double>::infinity();
  double prev_norm = std::numeric_limits<double>::infinity();
  Vector best = x;
  try {
    for (int it = 0; it < options.max_newton_iterations; ++it) {
      Matrix basis = geometry::tangent_basis(m, x);
      Vector grad;
      f.gradient(x, grad);
      Vector g = basis.transpose() * grad;
      const double gn = g.norm();
      if (gn < best_norm) {
        best_norm = gn;
        best = x;
      }
      // stop at exact zero or once the iteration reaches its roundoff floor
      if (gn <= 1e-15 || (gn <= options.grad_tol * 1e-3 && gn > 0.25 * prev_norm)) break;
      prev_norm = gn;
      Matrix h = basis.transpose() * geometry::hessian_form(m, f, x) * basis;
      Eigen::FullPivLU<Matrix> lu(h);
      Vector s;
      if (lu.isInvertible()) {
        s = -lu.solve(g);
      } else {
        s = -g;
      }
      if (!s.allFinite()) return std::nullopt;
      const double sn = s.norm();
      if (sn > cap) s *= cap / sn;
      x = geometry::retract(m, x + basis * s);
    }
  } catch (const Error&) {
    return std::nullopt;
  }
  if (best_norm > options.grad_tol) return std::nullopt;
  return NewtonResult{best, best_norm};
}

}  // namespace

IntrinsicHessian intrinsic_hessian(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                                   const Vector& p, double grad_tol) {
  const double gn = geometry::gradient_field(m, f, p).norm();
  if (gn > grad_tol) throw PreconditionError("intrinsic_hessian: point is not critical (|grad| = " +
                                             linalg::format_real(gn) + ")");
  IntrinsicHessian out;
  out.basis = geometry::tangent_basis(m, p);
  Matrix h = out.basis.transpose() * geometry::hessian_form(m, f, p) * out.basis;
  out.matrix = 0.5 * (h + h.transpose());
  out.eigen = linalg::jacobi_eigen(out.matrix);
  return out;
}

Census find_critical_points(const geometry::ImplicitManifold& m, const symbolics::Expression& f, int n_starts,
                            std::uint64_t seed, const CensusOptions& options) {
  if (n_starts < 1) throw PreconditionError("n_starts must be at least 1");
  const std::size_t starts = static_cast<std::size_t>(n_starts);
  std::vector<Vector> candidates = geometry::sample_points(m, 4 * starts, seed);

  std::vector<double> gnorm(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i)
    gnorm[i] = geometry::gradient_field(m, f, candidates[i]).norm();
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gnorm[a] < gnorm[b]; });

  std::vector<bool> chosen(candidates.size(), false);
  std::vector<Vector> start_points;
  const std::size_t low = starts / 2;
  for (std::size_t k = 0; k < low; ++k) {
    chosen[order[k]] = true;
    start_points.push_back(candidates[order[k]]);
  }
  for (std::size_t i = 0; i < candidates.size() && start_points.size() < starts; ++i) {
    if (chosen[i]) continue;
    start_points.push_back(candidates[i]);
  }

  const double cap = newton_step_cap(m);
  auto results = parallel_map(start_points.size(),
                              [&](std::size_t i) { return riemannian_newton(m, f, start_points[i], options, cap); });

  Census census;
  census.starts = static_cast<int>(start_points.size());
  std::vector<NewtonResult> unique;
  for (auto& r : results) {
    if (!r) {
      ++census.discarded;
      continue;
    }
    ++census.converged;
    bool merged = false;
    for (auto& u : unique) {
      if ((u.x - r->x).norm() <= options.dedupe_radius) {
        if (r->grad_norm < u.grad_norm) u = *r;
        merged = true;
        break;
      }
    }
    if (!merged) unique.push_back(*r);
  }

  for (const auto& u : unique) {
    CriticalPoint cp;
    cp.location = u.x;
    cp.value = f.value(u.x);
    cp.gradient_norm = geometry::gradient_field(m, f, u.x).norm();
    IntrinsicHessian ih = intrinsic_hessian(m, f, u.x, options.grad_tol);
    cp.eigenvalues = ih.eigen.values;
    cp.eigenvectors = ih.basis * ih.eigen.vectors;
    cp.index = static_cast<int>((cp.eigenvalues.array() < 0).count());
    cp.nondegeneracy_margin = cp.eigenvalues.size() ? cp.eigenvalues.cwiseAbs().minCoeff() : 0.0;
    cp.degenerate = !(cp.nondegeneracy_margin > options.degenerate_tol);
    census.points.push_back(std::move(cp));
  }

  // Ascending value; ties (within 1e-9) broken lexicographically by location.
  auto lex_less = [](const Vector& a, const Vector& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (std::fabs(a(i) - b(i)) > 1e-9) return a(i) < b(i);
    }
    return false;
  };
  auto& pts = census.points;
  std::sort(pts.begin(), pts.end(), [](const CriticalPoint& a, const CriticalPoint& b) { return a.value < b.value; });
  for (std::size_t i = 0; i < pts.size();) {
    std::size_t j = i + 1;
    while (j < pts.size() && pts[j].value - pts[i].value <= 1e-9) ++j;
    std::sort(pts.begin() + static_cast<std::ptrdiff_t>(i), pts.begin() + static_cast<std::ptrdiff_t>(j),
              [&](const CriticalPoint& a, const CriticalPoint& b) { return lex_less(a.location, b.location); });
    i = j;
  }
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i].id = static_cast<int>(i);
  return census;
}

GeometricConstants geometric_constants(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                                       const std::vector<CriticalPoint>& crits, std::size_t n_samples,
                                       std::uint64_t seed) {
  std::vector<Vector> samples = geometry::sample_points(m, n_samples, seed);
  if (crits.size() < 2) {
    double floor = std::numeric_limits<double>::infinity();
    for (const auto& x : samples) floor = std::min(floor, geometry::gradient_field(m, f, x).norm());
    throw InsufficientCriticalPoints(floor);
  }
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < crits.size(); ++i)
    for (std::size_t j = i + 1; j < crits.size(); ++j)
      dmin = std::min(dmin, (crits[i].location - crits[j].location).norm());
  GeometricConstants gc;
  gc.r = 0.5 * dmin;
  gc.c_floor = std::numeric_limits<double>::infinity();
  for (const auto& x : samples) {
    bool outside = true;
    for (const auto& c : crits) {
      if ((x - c.location).norm() <= 0.5 * gc.r) {
        outside = false;
        break;
      }
    }
    if (!outside) continue;
    ++gc.samples_outside;
    gc.c_floor = std::min(gc.c_floor, geometry::gradient_field(m, f, x).norm());
  }
  if (gc.samples_outside == 0) throw PreconditionError("no samples fell outside the critical-point balls");
  return gc;
}

int euler_characteristic(const std::vector<CriticalPoint>& crits) {
  int chi = 0;
  for (const auto& c : crits) chi += (c.index % 2 == 0) ? 1 : -1;
  return chi;
}

bool is_morse(const std::vector<CriticalPoint>& crits) {
  if (crits.empty()) return false;
  return std::none_of(crits.begin(), crits.end(), [](const CriticalPoint& c) { return c.degenerate; });
}

int nearest_critical_point(const std::vector<CriticalPoint>& crits, const Vector& x, double radius) {
  int best = -1;
  double best_d = radius;
  for (const auto& c : crits) {
    const double d = (c.location - x).norm();
    if (d <= best_d) {
      best_d = d;
      best = c.id;
    }
  }
  return best;
}

}  // namespace morseflow::morse
