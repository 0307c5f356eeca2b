#include "morseflow/catalog.hpp"
#include "morseflow/morse.hpp"

#include <doctest.h>

#include <cmath>

using namespace morseflow;
using geometry::Matrix;
using geometry::Vector;

namespace {

morse::Census census_of(const catalog::Scenario& sc, int starts, std::uint64_t seed = 0) {
  return morse::find_critical_points(sc.manifold, sc.function, starts, seed, sc.census);
}

std::vector<double> values(const morse::Census& c) {
  std::vector<double> out;
  for (const auto& p : c.points) out.push_back(p.value);
  return out;
}

std::vector<int> indices(const morse::Census& c) {
  std::vector<int> out;
  for (const auto& p : c.points) out.push_back(p.index);
  return out;
}

}  // namespace

TEST_CASE("sphere census: two poles") {
  const auto sc = catalog::load_scenario("sphere2");
  const auto c = census_of(sc, 200);
  REQUIRE(c.points.size() == 2);
  CHECK(c.points[0].value == doctest::Approx(-1).epsilon(1e-12));
  CHECK(c.points[1].value == doctest::Approx(1).epsilon(1e-12));
  CHECK(indices(c) == std::vector<int>{0, 2});
  CHECK(c.starts == 200);
  CHECK(c.converged + c.discarded == c.starts);
  CHECK(morse::euler_characteristic(c.points) == 2);
  CHECK(morse::is_morse(c.points));
}

TEST_CASE("upright torus census against the parametrization") {
  const auto sc = catalog::load_scenario("torus_upright");
  const auto c = census_of(sc, sc.census_starts, sc.seeds.census);
  REQUIRE(c.points.size() == 4);
  const std::vector<double> expect{-3, -1, 1, 3};
  for (std::size_t i = 0; i < 4; ++i) CHECK(c.points[i].value == doctest::Approx(expect[i]).epsilon(1e-10));
  CHECK(indices(c) == std::vector<int>{0, 1, 1, 2});
  CHECK(morse::euler_characteristic(c.points) == 0);
  // Minimum: metric diag(9, 1), raw Hessian diag(3, 1).
  CHECK(c.points[0].eigenvalues(0) == doctest::Approx(1.0 / 3).epsilon(1e-8));
  CHECK(c.points[0].eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("Clifford torus census") {
  const auto sc = catalog::load_scenario("clifford");
  const auto c = census_of(sc, sc.census_starts, sc.seeds.census);
  REQUIRE(c.points.size() == 4);
  const double r2 = std::sqrt(2.0);
  CHECK(c.points[0].value == doctest::Approx(-r2).epsilon(1e-12));
  CHECK(std::fabs(c.points[1].value) < 1e-12);
  CHECK(std::fabs(c.points[2].value) < 1e-12);
  CHECK(c.points[3].value == doctest::Approx(r2).epsilon(1e-12));
  CHECK(indices(c) == std::vector<int>{0, 1, 1, 2});
  CHECK(c.points[0].eigenvalues(0) == doctest::Approx(r2).epsilon(1e-8));
  CHECK(c.points[0].eigenvalues(1) == doctest::Approx(r2).epsilon(1e-8));
  CHECK(morse::euler_characteristic(c.points) == 0);
}

TEST_CASE("critical point invariants on every catalog scenario") {
  for (const auto& name : catalog::list_scenarios()) {
    CAPTURE(name);
    const auto sc = catalog::load_scenario(name);
    const auto c = census_of(sc, sc.census_starts, sc.seeds.census);
    REQUIRE(sc.expected);
    CHECK(c.points.size() == sc.expected->indices.size());
    CHECK(morse::euler_characteristic(c.points) == sc.expected->euler_characteristic);
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      const auto& p = c.points[i];
      CHECK(p.id == static_cast<int>(i));
      if (i > 0) CHECK(p.value >= c.points[i - 1].value - 1e-12);
      CHECK(p.gradient_norm <= sc.census.grad_tol);
      CHECK(sc.manifold.on_manifold(p.location));
      int negative = 0;
      for (Eigen::Index k = 0; k < p.eigenvalues.size(); ++k) {
        if (k > 0) CHECK(p.eigenvalues(k) >= p.eigenvalues(k - 1));
        if (p.eigenvalues(k) < 0) ++negative;
      }
      CHECK(p.index == negative);
      CHECK(p.nondegeneracy_margin == doctest::Approx(p.eigenvalues.cwiseAbs().minCoeff()));
      CHECK_FALSE(p.degenerate);
      const Matrix& e = p.eigenvectors;
      CHECK((e.transpose() * e - Matrix::Identity(e.cols(), e.cols())).cwiseAbs().maxCoeff() < 1e-8);
      for (Eigen::Index k = 0; k < e.cols(); ++k)
        CHECK(geometry::tangency_residual(sc.manifold, p.location, e.col(k)) < 1e-8);

      // Eigenpairs of the tangent-basis Hessian.
      const auto h = morse::intrinsic_hessian(sc.manifold, sc.function, p.location);
      for (Eigen::Index k = 0; k < h.eigen.values.size(); ++k) {
        const Vector v = h.eigen.vectors.col(k);
        CHECK((h.matrix * v - h.eigen.values(k) * v).norm() < 1e-8);
      }
    }
  }
}

TEST_CASE("census is independent of the seed") {
  const auto sc = catalog::load_scenario("torus_upright");
  const auto a = census_of(sc, sc.census_starts, 1);
  const auto b = census_of(sc, sc.census_starts, 2);
  REQUIRE(a.points.size() == b.points.size());
  for (const auto& p : a.points) CHECK(morse::nearest_critical_point(b.points, p.location, 1e-6) >= 0);
}

TEST_CASE("census is deterministic for a fixed seed") {
  const auto sc = catalog::load_scenario("clifford");
  const auto a = census_of(sc, 32, 5);
  const auto b = census_of(sc, 32, 5);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) CHECK((a.points[i].location - b.points[i].location).norm() == 0);
  CHECK(values(a) == values(b));
}

TEST_CASE("intrinsic Hessian at the south pole") {
  const auto sc = catalog::load_scenario("sphere2");
  Vector south(3);
  south << 0, 0, -1;
  const auto h = morse::intrinsic_hessian(sc.manifold, sc.function, south);
  CHECK(h.eigen.values(0) == doctest::Approx(1));
  CHECK(h.eigen.values(1) == doctest::Approx(1));
  Vector equator(3);
  equator << 1, 0, 0;
  CHECK_THROWS_AS(morse::intrinsic_hessian(sc.manifold, sc.function, equator), PreconditionError);
}

TEST_CASE("degenerate critical points are flagged") {
  // f = x3^3 on the sphere: the poles are degenerate minimum/maximum; the
  // equator is a circle of degenerate critical points.
  auto sc = catalog::load_scenario("sphere2");
  const auto f = symbolics::parse("x3^3 - x1^3", 3);
  const auto c = morse::find_critical_points(sc.manifold, f, 64, 0, sc.census);
  bool any_degenerate = false;
  for (const auto& p : c.points) any_degenerate = any_degenerate || p.degenerate;
  CHECK(any_degenerate);
  CHECK_FALSE(morse::is_morse(c.points));
}

TEST_CASE("geometric constants") {
  const auto sc = catalog::load_scenario("sphere2");
  const auto c = census_of(sc, 64);
  const auto k = morse::geometric_constants(sc.manifold, sc.function, c.points, 2000, 0);
  CHECK(k.r == doctest::Approx(1).epsilon(1e-12));
  CHECK(k.c_floor > 0);
  // Outside chordal radius 1/2 of the poles |grad f| = sin(polar angle) >= sqrt(15)/8.
  CHECK(k.c_floor >= std::sqrt(15.0) / 8 - 1e-12);
  CHECK(k.samples_outside > 0);

  const std::vector<morse::CriticalPoint> one{c.points[0]};
  try {
    morse::geometric_constants(sc.manifold, sc.function, one, 500, 0);
    FAIL("expected an error");
  } catch (const morse::InsufficientCriticalPoints& e) {
    CHECK(e.gradient_floor() >= 0);
  }
}

TEST_CASE("nearest critical point") {
  const auto sc = catalog::load_scenario("sphere2");
  const auto c = census_of(sc, 64);
  Vector x(3);
  x << 0, 0, -1;
  CHECK(morse::nearest_critical_point(c.points, x, 1e-6) == 0);
  x << 1, 0, 0;
  CHECK(morse::nearest_critical_point(c.points, x, 1e-3) == -1);
  CHECK_FALSE(morse::is_morse({}));
}
