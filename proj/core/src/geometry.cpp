#include "morseflow/geometry.hpp"

#include "morseflow/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace morseflow::geometry {

ImplicitManifold::ImplicitManifold(int ambient_dim, std::vector<symbolics::Expression> constraints, Box box,
                                   double constraint_tol, double rank_tol)
    : ambient_dim_(ambient_dim),
      constraints_(std::move(constraints)),
      box_(std::move(box)),
      constraint_tol_(constraint_tol),
      rank_tol_(rank_tol) {
  if (ambient_dim_ < 1) throw PreconditionError("ambient dimension must be at least 1");
  if (constraints_.empty() || codim() >= ambient_dim_)
    throw PreconditionError("need between 1 and ambient_dim - 1 constraints");
  for (const auto& c : constraints_)
    if (c.ambient_dim() != ambient_dim_) throw PreconditionError("constraint ambient dimension mismatch");
  if (!(constraint_tol_ > 0) || !(rank_tol_ > 0)) throw PreconditionError("tolerances must be positive");
  if (box_.lo.size() != 0 && (box_.lo.size() != ambient_dim_ || box_.hi.size() != ambient_dim_))
    throw PreconditionError("sampling box dimension mismatch");
}

Vector ImplicitManifold::constraint_values(const Vector& x) const {
  Vector v(codim());
  for (int a = 0; a < codim(); ++a) v(a) = constraints_[a].value(x);
  return v;
}

double ImplicitManifold::constraint_residual(const Vector& x) const {
  return constraint_values(x).cwiseAbs().maxCoeff();
}

Matrix ImplicitManifold::jacobian(const Vector& x) const {
  Matrix j(codim(), ambient_dim_);
  Vector g;
  for (int a = 0; a < codim(); ++a) {
    constraints_[a].gradient(x, g);
    j.row(a) = g.transpose();
  }
  return j;
}

namespace {

double min_singular_from_gram(const Matrix& gram) {
  if (gram.rows() == 1) return std::sqrt(std::max(gram(0, 0), 0.0));
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(es.eigenvalues()(0), 0.0));
}

// J together with a factorization of J J^T, after the rank check.
struct NormalData {
  Matrix j;
  Eigen::LDLT<Matrix> gram;
};

NormalData normal_data(const ImplicitManifold& m, const Vector& x) {
  NormalData d{m.jacobian(x), {}};
  Matrix g = d.j * d.j.transpose();
  if (min_singular_from_gram(g) <= m.rank_tol())
    throw RankDeficiencyError("constraint Jacobian is rank deficient at the query point");
  d.gram.compute(g);
  return d;
}

}  // namespace

double ImplicitManifold::jacobian_min_singular(const Vector& x) const {
  Matrix j = jacobian(x);
  return min_singular_from_gram(j * j.transpose());
}

bool ImplicitManifold::on_manifold(const Vector& x) const {
  return x.size() == ambient_dim_ && constraint_residual(x) <= constraint_tol_ &&
         jacobian_min_singular(x) > rank_tol_;
}

double tangency_residual(const ImplicitManifold& m, const Vector& base, const Vector& vec) {
  return (m.jacobian(base) * vec).norm();
}

Matrix tangent_projector(const ImplicitManifold& m, const Vector& x) {
  NormalData d = normal_data(m, x);
  Matrix p = Matrix::Identity(m.ambient_dim(), m.ambient_dim()) - d.j.transpose() * d.gram.solve(d.j);
  return 0.5 * (p + p.transpose());
}

Vector gradient_field(const ImplicitManifold& m, const symbolics::Expression& f, const Vector& x) {
  NormalData d = normal_data(m, x);
  Vector g;
  f.gradient(x, g);
  return g - d.j.transpose() * d.gram.solve(d.j * g);
}

TangentVector riemannian_gradient(const ImplicitManifold& m, const symbolics::Expression& f, const Vector& x) {
  return {x, gradient_field(m, f, x)};
}

Vector lagrange_multipliers(const ImplicitManifold& m, const Vector& grad_f, const Vector& x) {
  NormalData d = normal_data(m, x);
  return d.gram.solve(d.j * grad_f);
}

Matrix hessian_form(const ImplicitManifold& m, const symbolics::Expression& f, const Vector& x) {
  symbolics::SecondOrderJet jf = f.jet(x);
  Vector lambda = lagrange_multipliers(m, jf.gradient, x);
  Matrix w = jf.hessian;
  for (int a = 0; a < m.codim(); ++a) w -= lambda(a) * m.constraints()[a].jet(x).hessian;
  return w;
}

Vector retract(const ImplicitManifold& m, const Vector& x) {
  if (x.size() != m.ambient_dim()) throw PreconditionError("point dimension mismatch");
  Vector y = x;
  Vector fv = m.constraint_values(y);
  if (fv.cwiseAbs().maxCoeff() <= m.constraint_tol()) return y;
  constexpr int kMaxIterations = 25;
  for (int it = 0; it < kMaxIterations; ++it) {
    Matrix j = m.jacobian(y);
    Matrix g = j * j.transpose();
    if (min_singular_from_gram(g) <= m.rank_tol())
      throw ConvergenceError("retraction hit a rank-deficient constraint Jacobian");
    y -= j.transpose() * g.ldlt().solve(fv);
    fv = m.constraint_values(y);
    const double res = fv.cwiseAbs().maxCoeff();
    if (!std::isfinite(res)) break;
    if (res <= m.constraint_tol()) {
      // one polishing step; Newton is quadratic here
      Matrix jp = m.jacobian(y);
      Vector yp = y - jp.transpose() * (jp * jp.transpose()).ldlt().solve(fv);
      if (m.constraint_residual(yp) <= res) y = yp;
      return y;
    }
  }
  throw ConvergenceError("retraction did not converge within 25 iterations");
}

Matrix tangent_basis(const ImplicitManifold& m, const Vector& x) {
  const int n = m.ambient_dim();
  const int d = m.dim();
  Matrix p = tangent_projector(m, x);
  Matrix basis(n, d);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (int k = 0; k < d; ++k) {
    int best = -1;
    double best_norm = -1;
    Vector best_vec;
    for (int i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      Vector v = p.col(i);
      for (int pass = 0; pass < 2; ++pass)
        for (int c = 0; c < k; ++c) v -= basis.col(c).dot(v) * basis.col(c);
      const double nv = v.norm();
      if (nv > best_norm + 1e-14) {
        best_norm = nv;
        best = i;
        best_vec = v;
      }
    }
    if (best < 0 || best_norm < 1e-8) throw RankDeficiencyError("tangent space has lower dimension than expected");
    used[static_cast<std::size_t>(best)] = true;
    basis.col(k) = best_vec / best_norm;
  }
  return basis;
}

std::vector<Vector> sample_points(const ImplicitManifold& m, std::size_t count, std::uint64_t seed) {
  const Box& box = m.box();
  if (box.lo.size() != m.ambient_dim()) throw PreconditionError("manifold has no sampling box");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> out;
  out.reserve(count);
  const std::size_t max_attempts = 100000 * std::max<std::size_t>(count, 1);
  Vector x(m.ambient_dim());
  for (std::size_t attempt = 0; out.size() < count; ++attempt) {
    if (attempt >= max_attempts) throw ConvergenceError("manifold sampling acceptance rate too low");
    for (int i = 0; i < m.ambient_dim(); ++i) x(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * unit(rng);
    if (m.constraint_residual(x) >= 0.5) continue;
    try {
      Vector y = retract(m, x);
      if (m.on_manifold(y)) out.push_back(std::move(y));
    } catch (const Error&) {
      // rejected sample
    }
  }
  return out;
}

}  // namespace morseflow::geometry
