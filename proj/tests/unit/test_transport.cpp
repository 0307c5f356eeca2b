#include "morseflow/catalog.hpp"
#include "morseflow/linalg.hpp"
#include "morseflow/transport.hpp"

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

}  // namespace

TEST_CASE("zero-length transport returns the initial frame") {
  Fixture fx("sphere2");
  const Vector x = vec({1, 0, 0});
  const Matrix frame = geometry::tangent_basis(fx.sc.manifold, x);
  const auto tf = transport::parallel_transport(fx.sc.manifold, std::vector<Vector>{x}, frame);
  REQUIRE(tf.frames.size() == 1);
  CHECK((tf.frames[0] - frame).norm() == 0);
}

TEST_CASE("transport along a meridian keeps the meridian tangent") {
  Fixture fx("sphere2");
  const double theta = 1.2;
  std::vector<Vector> path;
  for (int i = 0; i <= 400; ++i) {
    const double s = theta * i / 400;
    path.push_back(vec({std::cos(s), 0, std::sin(s)}));
  }
  Matrix frame(3, 2);
  frame.col(0) = vec({0, 0, 1});
  frame.col(1) = vec({0, 1, 0});
  const auto tf = transport::parallel_transport(fx.sc.manifold, path, frame, 2);
  const Matrix& w = tf.frames.back();
  CHECK((w.col(0) - vec({-std::sin(theta), 0, std::cos(theta)})).norm() < 1e-6);
  CHECK((w.col(1) - vec({0, 1, 0})).norm() < 1e-6);
  CHECK(tf.max_gram_deviation < 1e-12);
  CHECK(tf.max_step_deviation < 1e-4);
}

TEST_CASE("transport along flow lines preserves the Gram matrix") {
  for (const auto& name : catalog::list_scenarios()) {
    CAPTURE(name);
    Fixture fx(name.c_str());
    const auto starts = geometry::sample_points(fx.sc.manifold, 3, 17);
    for (const auto& x0 : starts) {
      const auto traj = flow::integrate_flow(fx.sc.manifold, fx.sc.function, x0, fx.sc.integrator, fx.census.points);
      const Matrix frame = geometry::tangent_basis(fx.sc.manifold, x0);
      const auto tf = transport::parallel_transport(fx.sc.manifold, traj, frame, 4);
      CHECK(tf.max_gram_deviation < 1e-6);
      for (std::size_t i = 0; i < tf.frames.size(); ++i)
        for (Eigen::Index j = 0; j < tf.frames[i].cols(); ++j)
          CHECK(geometry::tangency_residual(fx.sc.manifold, tf.points[i], tf.frames[i].col(j)) < 1e-7);
    }
  }
}

TEST_CASE("transport rejects a non-orthonormal frame") {
  Fixture fx("sphere2");
  Matrix frame(3, 1);
  frame.col(0) = vec({0, 2, 0});
  CHECK_THROWS_AS(transport::parallel_transport(fx.sc.manifold, std::vector<Vector>{vec({1, 0, 0})}, frame),
                  PreconditionError);
  CHECK_THROWS_AS(transport::parallel_transport(fx.sc.manifold, std::vector<Vector>{}, frame), PreconditionError);
}

TEST_CASE("sphere sectional curvature is one") {
  Fixture fx("sphere2");
  const auto points = geometry::sample_points(fx.sc.manifold, 20, 4);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [u, v] = transport::random_tangent_plane(fx.sc.manifold, points[i], 100 + i);
    const auto s = transport::holonomy_curvature(fx.sc.manifold, points[i], u, v);
    CHECK(std::fabs(s.sectional - 1) < 0.05);
    // Skew-symmetric in an orthonormal frame.
    CHECK((s.op + s.op.transpose()).norm() < 1e-3);
    // Antisymmetric in the plane.
    const auto r = transport::holonomy_curvature(fx.sc.manifold, points[i], v, u);
    CHECK((s.ambient() + r.ambient()).norm() < 2e-3);
    // On S^2, R(u, v) v = u.
    CHECK((s.ambient() * v - u).norm() < 0.05);
  }
}

TEST_CASE("R(u, u) vanishes") {
  Fixture fx("sphere2");
  const Vector x = geometry::retract(fx.sc.manifold, vec({0.3, 0.5, 0.7}));
  const Vector u = geometry::tangent_basis(fx.sc.manifold, x).col(0);
  const auto s = transport::holonomy_curvature(fx.sc.manifold, x, u, u);
  CHECK(s.norm < 1e-6);
}

TEST_CASE("Clifford torus is flat") {
  Fixture fx("clifford");
  const auto points = geometry::sample_points(fx.sc.manifold, 20, 4);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [u, v] = transport::random_tangent_plane(fx.sc.manifold, points[i], 200 + i);
    CHECK(transport::holonomy_curvature(fx.sc.manifold, points[i], u, v).norm < 1e-3);
  }
}

TEST_CASE("holonomy preconditions") {
  Fixture fx("sphere2");
  const Vector x = vec({1, 0, 0});
  const Vector u = vec({0, 1, 0});
  const Vector v = vec({0, 0, 1});
  transport::HolonomyOptions opts;
  opts.h = 0.5;
  CHECK_THROWS_AS(transport::holonomy_curvature(fx.sc.manifold, x, u, v, opts), PreconditionError);
  CHECK_THROWS_AS(transport::holonomy_curvature(fx.sc.manifold, x, 2 * u, v), PreconditionError);
  CHECK_THROWS_AS(transport::holonomy_curvature(fx.sc.manifold, x, x, v), PreconditionError);
  CHECK_THROWS_AS(transport::holonomy_curvature(fx.sc.manifold, x, u, (u + v).normalized()), PreconditionError);
}

TEST_CASE("flow invariance defect") {
  Fixture sphere("sphere2");
  Fixture cliff("clifford");
  for (auto* fx : {&sphere, &cliff}) {
    const auto x = geometry::sample_points(fx->sc.manifold, 1, 8).front();
    const auto [u, v] = transport::random_tangent_plane(fx->sc.manifold, x, 3);
    CHECK(transport::flow_invariance_defect(fx->sc.manifold, fx->sc.function, x, u, v, 0.0) < 1e-12);
  }
  const auto xc = geometry::retract(cliff.sc.manifold, vec({0.1, 0.7, 0.6, 0.3}));
  const auto [uc, vc] = transport::random_tangent_plane(cliff.sc.manifold, xc, 5);
  const double flat = transport::flow_invariance_defect(cliff.sc.manifold, cliff.sc.function, xc, uc, vc, 0.5);
  CHECK(flat < 1e-3);

  const Vector xs = geometry::retract(sphere.sc.manifold, vec({0.9, 0.2, 0.3}));
  const auto [us, vs] = transport::random_tangent_plane(sphere.sc.manifold, xs, 5);
  const double curved = transport::flow_invariance_defect(sphere.sc.manifold, sphere.sc.function, xs, us, vs, 0.5);
  CHECK(curved > 10 * std::max(flat, 1e-3));
  CHECK_THROWS_AS(transport::flow_invariance_defect(sphere.sc.manifold, sphere.sc.function, xs, us, vs, -1.0),
                  PreconditionError);
}

TEST_CASE("Lie derivative estimates") {
  Fixture sphere("sphere2");
  Fixture cliff("clifford");
  const auto xc = geometry::retract(cliff.sc.manifold, vec({0.1, 0.7, 0.6, 0.3}));
  const auto [uc, vc] = transport::random_tangent_plane(cliff.sc.manifold, xc, 7);
  const double flat = transport::lie_derivative_estimate(cliff.sc.manifold, cliff.sc.function, xc, uc, vc);
  CHECK(flat < 1e-2);

  // On a surface the pulled-back curvature scales with the Jacobian of the
  // flow, so the derivative is div(grad f) R = -2 x3 R(u, v) on the sphere:
  // zero on the equator and largest at the poles.
  for (const auto& p : {vec({1, 0, 0}), vec({0.6, 0.0, 0.8}), vec({0.3, -0.5, 0.4}), vec({0.1, 0.2, -0.9})}) {
    const Vector x = geometry::retract(sphere.sc.manifold, p);
    CAPTURE(x.transpose());
    const auto [u, v] = transport::random_tangent_plane(sphere.sc.manifold, x, 7);
    const double est = transport::lie_derivative_estimate(sphere.sc.manifold, sphere.sc.function, x, u, v);
    CHECK(std::fabs(est - 2 * std::fabs(x(2))) < 0.05 * std::max(1.0, 2 * std::fabs(x(2))));
  }
  const Vector off = geometry::retract(sphere.sc.manifold, vec({0.6, 0.0, 0.8}));
  const auto [uo, vo] = transport::random_tangent_plane(sphere.sc.manifold, off, 7);
  CHECK(transport::lie_derivative_estimate(sphere.sc.manifold, sphere.sc.function, off, uo, vo) > 10 * flat);

  // At a critical point the flow fixes x but d(phi_t) = exp(-tH) still acts
  // on the plane: the derivative is -R(Hu, v) - R(u, Hv) = -2 R(u, v) on the
  // round sphere with H = I.
  const Vector south = sphere.census.points[0].location;
  const auto [up, vp] = transport::random_tangent_plane(sphere.sc.manifold, south, 7);
  const double pole = transport::lie_derivative_estimate(sphere.sc.manifold, sphere.sc.function, south, up, vp);
  CHECK(pole == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("flatness verdicts") {
  Fixture sphere("sphere2");
  Fixture cliff("clifford");
  const auto flat = transport::flatness_test(cliff.sc.manifold, cliff.sc.function, cliff.census.points, 5, 1);
  CHECK(flat.samples.size() == 5);
  CHECK(flat.lie_derivative_max < flat.floor);
  CHECK(flat.curvature_max < flat.floor);
  CHECK(flat.consistent);

  const auto round = transport::flatness_test(sphere.sc.manifold, sphere.sc.function, sphere.census.points, 5, 1);
  CHECK(round.curvature_max == doctest::Approx(1.0).epsilon(0.05));
  CHECK(round.lie_derivative_max > round.floor);
  CHECK(round.consistent);

  // A constant function is not Morse: every point is a degenerate critical point.
  const auto constant = symbolics::parse("1", 3);
  const auto census = morse::find_critical_points(sphere.sc.manifold, constant, 8, 0, sphere.sc.census);
  CHECK_THROWS_AS(transport::flatness_test(sphere.sc.manifold, constant, census.points, 5, 1), PreconditionError);
}

TEST_CASE("random tangent planes are orthonormal and deterministic") {
  Fixture fx("clifford");
  const auto x = geometry::sample_points(fx.sc.manifold, 1, 2).front();
  const auto [u, v] = transport::random_tangent_plane(fx.sc.manifold, x, 9);
  const auto [u2, v2] = transport::random_tangent_plane(fx.sc.manifold, x, 9);
  CHECK(std::fabs(u.norm() - 1) < 1e-14);
  CHECK(std::fabs(v.norm() - 1) < 1e-14);
  CHECK(std::fabs(u.dot(v)) < 1e-14);
  CHECK((u - u2).norm() == 0);
  CHECK((v - v2).norm() == 0);
}
