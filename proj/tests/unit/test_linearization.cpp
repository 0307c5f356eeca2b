#include "morseflow/catalog.hpp"
#include "morseflow/linearization.hpp"

#include <doctest.h>

#include <cmath>

using namespace morseflow;
using geometry::Matrix;
using geometry::Vector;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

struct Fixture {
  catalog::Scenario sc;
  morse::Census census;
  explicit Fixture(const char* name)
      : sc(catalog::load_scenario(name)),
        census(morse::find_critical_points(sc.manifold, sc.function, sc.census_starts, sc.seeds.census, sc.census)) {}
};

flow::FlowConfig fixed_time(double t) {
  flow::FlowConfig cfg;
  cfg.t_max = t;
  cfg.stop_at_capture = false;
  return cfg;
}

}  // namespace

TEST_CASE("zero initial vector stays zero") {
  Fixture fx("sphere2");
  const auto s = linearization::integrate_variational(fx.sc.manifold, fx.sc.function, vec({1, 0, 0}),
                                                      Matrix::Zero(3, 1), fixed_time(2.0), {});
  for (const auto& smp : s.samples) CHECK(smp.energy() == 0);
  const auto check = linearization::check_energy_ode(s, fx.sc.manifold, fx.sc.function);
  CHECK(check.samples_checked == 0);
  CHECK(check.max_relative_residual == 0);
}

TEST_CASE("initial sample is the initial vector bitwise") {
  Fixture fx("clifford");
  const Vector x0 = geometry::retract(fx.sc.manifold, vec({0.6, 0.3, 0.2, 0.7}));
  const Matrix basis = geometry::tangent_basis(fx.sc.manifold, x0);
  const auto s = linearization::integrate_variational(fx.sc.manifold, fx.sc.function, x0, basis, fixed_time(0.5), {});
  CHECK((s.samples.front().vectors - basis).norm() == 0);
  CHECK(s.samples.front().t == 0);
}

TEST_CASE("linearity in the initial vector") {
  Fixture fx("torus_upright");
  const Vector x0 = geometry::retract(fx.sc.manifold, vec({0.5, 2.6, 0.8}));
  const Vector v = geometry::tangent_basis(fx.sc.manifold, x0).col(0);
  const auto a =
      linearization::integrate_variational(fx.sc.manifold, fx.sc.function, x0, Matrix(v), fixed_time(3.0), {});
  const auto b =
      linearization::integrate_variational(fx.sc.manifold, fx.sc.function, x0, Matrix(2 * v), fixed_time(3.0), {});
  REQUIRE(a.samples.size() == b.samples.size());
  double worst = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const Vector va = a.samples[i].vectors.col(0);
    const Vector vb = b.samples[i].vectors.col(0);
    worst = std::max(worst, (vb - 2 * va).norm() / std::max(1e-300, vb.norm()));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("variational flow matches finite differences of the flow") {
  Fixture fx("sphere2");
  const Vector x0 = geometry::retract(fx.sc.manifold, vec({0.7, 0.2, 0.4}));
  const Vector v = geometry::tangent_basis(fx.sc.manifold, x0).col(1);
  const auto cfg = fixed_time(1.0);
  const auto s = linearization::integrate_variational(fx.sc.manifold, fx.sc.function, x0, Matrix(v), cfg, {});
  const Vector vt = s.samples.back().vectors.col(0);
  const Vector base = flow::integrate_flow(fx.sc.manifold, fx.sc.function, x0, cfg, {}).samples.back().x;
  auto defect = [&](double eps) {
    const Vector xe = geometry::retract(fx.sc.manifold, x0 + eps * v);
    const Vector moved = flow::integrate_flow(fx.sc.manifold, fx.sc.function, xe, cfg, {}).samples.back().x;
    return (moved - base - eps * vt).norm();
  };
  const double d1 = defect(1e-4);
  const double d2 = defect(5e-5);
  CHECK(d1 < 1e-7);
  // Quadratic in eps: halving eps divides the defect by about four.
  CHECK(d1 / d2 > 3.0);
  CHECK(d1 / d2 < 5.0);
}

TEST_CASE("tangency is maintained") {
  Fixture fx("clifford");
  const Vector x0 = geometry::retract(fx.sc.manifold, vec({0.6, 0.3, 0.2, 0.7}));
  const Matrix basis = geometry::tangent_basis(fx.sc.manifold, x0);
  const auto s = linearization::integrate_variational(fx.sc.manifold, fx.sc.function, x0, basis, fixed_time(2.0), {});
  for (const auto& smp : s.samples)
    for (Eigen::Index j = 0; j < 2; ++j)
      CHECK(geometry::tangency_residual(fx.sc.manifold, smp.x, smp.vectors.col(j)) < 1e-6 * smp.vectors.col(j).norm());
  CHECK(s.max_tangency_drift < 1e-6);
}

TEST_CASE("energy identity on the sphere") {
  Fixture fx("sphere2");
  const auto s = linearization::integrate_variational(fx.sc.manifold, fx.sc.function, vec({1, 0, 0}),
                                                      Matrix(vec({0, 1, 1}).normalized()), fx.sc.integrator,
                                                      fx.census.points);
  const auto check = linearization::check_energy_ode(s, fx.sc.manifold, fx.sc.function);
  CHECK(check.samples_checked > 100);
  CHECK(check.max_relative_residual < 1e-2);
  // Near the minimum the energy rate ratio approaches lambda_min = 1.
  REQUIRE(!check.rate_ratio.empty());
  CHECK(check.rate_ratio.back() == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("energy check needs three samples") {
  Fixture fx("sphere2");
  linearization::VariationalSeries s;
  CHECK_THROWS_AS(linearization::check_energy_ode(s, fx.sc.manifold, fx.sc.function), PreconditionError);
}

TEST_CASE("decay rates match lambda_min") {
  struct Case {
    const char* name;
    Vector x0;
    double c;
  };
  const std::vector<Case> cases{
      {"sphere2", vec({0.8, 0.3, 0.5}), 1.0},
      {"torus_upright", vec({0.5, 2.6, 0.8}), 1.0 / 3},
      {"clifford", vec({0.1, 0.7, 0.6, 0.3}), std::sqrt(2.0)},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    Fixture fx(c.name);
    const Vector x0 = geometry::retract(fx.sc.manifold, c.x0);
    const Matrix basis = geometry::tangent_basis(fx.sc.manifold, x0);
    const Vector v = (basis.col(0) + 0.7 * basis.col(basis.cols() - 1)).normalized();
    const auto s = linearization::integrate_variational(fx.sc.manifold, fx.sc.function, x0, Matrix(v),
                                                        fx.sc.integrator, fx.census.points);
    REQUIRE(s.terminal == flow::Terminal::Converged);
    const auto rep = linearization::fit_decay_rate(s, fx.census.points);
    CHECK(rep.c_pred == doctest::Approx(c.c).epsilon(1e-8));
    CHECK(rep.c_fit > 0);
    CHECK(rep.relative_gap < 0.05);
    CHECK(rep.fit_samples >= 20);
    CHECK(rep.fit_window[0] < rep.fit_window[1]);
  }
}

TEST_CASE("decay fit refuses runs that do not reach a minimum") {
  Fixture fx("sphere2");
  const auto s = linearization::integrate_variational(fx.sc.manifold, fx.sc.function, vec({1, 0, 0}),
                                                      Matrix(vec({0, 1, 0})), fixed_time(1.0), fx.census.points);
  CHECK_THROWS_AS(linearization::fit_decay_rate(s, fx.census.points), PreconditionError);
}

TEST_CASE("field derivative on the sphere") {
  // X(x) = e3 - x3 x, so dX(x)[v] = -v3 x - x3 v.
  Fixture fx("sphere2");
  const Vector x = geometry::retract(fx.sc.manifold, vec({0.3, -0.4, 0.6}));
  const Vector v = geometry::tangent_basis(fx.sc.manifold, x).col(0);
  const Vector expect = -v(2) * x - x(2) * v;
  CHECK((linearization::field_derivative(fx.sc.manifold, fx.sc.function, x, v) - expect).norm() < 1e-7);
}
