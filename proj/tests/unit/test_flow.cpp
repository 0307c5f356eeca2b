#include "morseflow/catalog.hpp"
#include "morseflow/flow.hpp"

#include <doctest.h>

#include <cmath>

using namespace morseflow;
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

TEST_CASE("height flow on the sphere follows z' = z^2 - 1") {
  Fixture fx("sphere2");
  const auto traj = flow::integrate_flow(fx.sc.manifold, fx.sc.function, vec({1, 0, 0}), fixed_time(1.0), {});
  CHECK(traj.samples.back().t == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(traj.samples.back().x(2) == doctest::Approx(-std::tanh(1.0)).epsilon(1e-6));
  CHECK(std::fabs(traj.samples.back().x(2) + std::tanh(1.0)) < 1e-6);
  CHECK(traj.terminal == flow::Terminal::MaxTimeReached);
}

TEST_CASE("height flow converges to the south pole with f decreasing") {
  Fixture fx("sphere2");
  const auto traj = flow::integrate_flow(fx.sc.manifold, fx.sc.function, vec({1, 0, 0}), fx.sc.integrator,
                                         fx.census.points);
  REQUIRE(traj.terminal == flow::Terminal::Converged);
  CHECK(flow::limit_point(traj, fx.census.points) == 0);
  CHECK(traj.samples.front().f == doctest::Approx(0));
  CHECK(traj.samples.back().f == doctest::Approx(-1).epsilon(1e-6));
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    CHECK(traj.samples[i].t > traj.samples[i - 1].t);
    CHECK(traj.samples[i].f <= traj.samples[i - 1].f + 1e-12);
  }
  CHECK(traj.stats.monotonicity_violations == 0);
  CHECK(traj.stats.max_constraint_drift <= 10 * fx.sc.manifold.constraint_tol());
}

TEST_CASE("a critical start converges immediately") {
  Fixture fx("sphere2");
  const auto& north = fx.census.points[1];
  const auto traj =
      flow::integrate_flow(fx.sc.manifold, fx.sc.function, north.location, fx.sc.integrator, fx.census.points);
  CHECK(traj.samples.size() == 1);
  CHECK(traj.terminal == flow::Terminal::Converged);
  CHECK(flow::limit_point(traj, fx.census.points) == 1);
}

TEST_CASE("stalled and max-time runs are distinguished") {
  Fixture fx("sphere2");
  // Without a registered south pole the flow stalls there.
  const std::vector<morse::CriticalPoint> north_only{fx.census.points[1]};
  const auto stalled =
      flow::integrate_flow(fx.sc.manifold, fx.sc.function, vec({1, 0, 0}), fx.sc.integrator, north_only);
  CHECK(stalled.terminal == flow::Terminal::Stalled);
  CHECK_THROWS_AS(flow::limit_point(stalled, north_only), UnregisteredCriticalPoint);

  auto cfg = fx.sc.integrator;
  cfg.t_max = 0.5;
  const auto timed = flow::integrate_flow(fx.sc.manifold, fx.sc.function, vec({1, 0, 0}), cfg, fx.census.points);
  CHECK(timed.terminal == flow::Terminal::MaxTimeReached);
  CHECK_THROWS_AS(flow::limit_point(timed, fx.census.points), PreconditionError);
}

TEST_CASE("backward flow climbs") {
  Fixture fx("sphere2");
  const auto traj = flow::integrate_flow(fx.sc.manifold, fx.sc.function, vec({1, 0, 0}), fx.sc.integrator,
                                         fx.census.points, flow::Direction::Backward);
  REQUIRE(traj.terminal == flow::Terminal::Converged);
  CHECK(traj.limit_id == 1);
  CHECK(traj.direction == flow::Direction::Backward);
  CHECK(traj.samples.back().f > traj.samples.front().f);
}

TEST_CASE("time-translation semigroup") {
  Fixture fx("sphere2");
  const Vector x0 = geometry::retract(fx.sc.manifold, vec({0.6, 0.3, 0.5}));
  const auto a = flow::integrate_flow(fx.sc.manifold, fx.sc.function, x0, fixed_time(0.7), {});
  const auto b = flow::integrate_flow(fx.sc.manifold, fx.sc.function, a.samples.back().x, fixed_time(0.9), {});
  const auto c = flow::integrate_flow(fx.sc.manifold, fx.sc.function, x0, fixed_time(1.6), {});
  CHECK((b.samples.back().x - c.samples.back().x).norm() < 1e-6);
}

TEST_CASE("energy identity along a converged trajectory") {
  Fixture fx("torus_upright");
  const Vector x0 = geometry::retract(fx.sc.manifold, vec({0.5, 2.6, 0.8}));
  const auto traj = flow::integrate_flow(fx.sc.manifold, fx.sc.function, x0, fx.sc.integrator, fx.census.points);
  REQUIRE(traj.terminal == flow::Terminal::Converged);
  const double drop = traj.samples.front().f - traj.samples.back().f;
  CHECK(flow::dissipated_energy(traj) == doctest::Approx(drop).epsilon(1e-3));
}

TEST_CASE("length bound") {
  Fixture fx("sphere2");
  const auto consts = morse::geometric_constants(fx.sc.manifold, fx.sc.function, fx.census.points, 2000, 0);
  auto cfg = flow::FlowConfig::for_constants(consts);
  const auto traj = flow::integrate_flow(fx.sc.manifold, fx.sc.function, vec({1, 0, 0}), cfg, fx.census.points);
  const auto rep = flow::check_length_bound(traj, fx.census.points, consts);
  CHECK(rep.pass);
  REQUIRE(rep.segments.size() == 1);
  CHECK(rep.lhs <= rep.rhs * 1.05);

  // Entirely inside one ball: vacuous.
  const Vector near = geometry::retract(fx.sc.manifold, vec({0.01, 0, -1}));
  const auto inside = flow::integrate_flow(fx.sc.manifold, fx.sc.function, near, cfg, fx.census.points);
  const auto vac = flow::check_length_bound(inside, fx.census.points, consts);
  CHECK(vac.pass);
  CHECK(vac.segments.empty());
}

TEST_CASE("length bound from the torus maximum") {
  Fixture fx("torus_upright");
  const auto consts = morse::geometric_constants(fx.sc.manifold, fx.sc.function, fx.census.points, 2000, 0);
  auto cfg = flow::FlowConfig::for_constants(consts);
  const auto seeds = flow::unstable_seeds(fx.sc.manifold, fx.census.points[3]);
  REQUIRE(seeds.size() == 4);
  const auto traj = flow::integrate_flow(fx.sc.manifold, fx.sc.function, seeds[0], cfg, fx.census.points);
  const auto rep = flow::check_length_bound(traj, fx.census.points, consts);
  CHECK(rep.pass);
  CHECK(rep.segments.size() >= 1);
}

TEST_CASE("unstable seeds") {
  Fixture fx("sphere2");
  const auto& north = fx.census.points[1];
  const auto seeds = flow::unstable_seeds(fx.sc.manifold, north, 1e-4);
  REQUIRE(seeds.size() == 4);
  for (const auto& s : seeds) {
    CHECK(fx.sc.manifold.on_manifold(s));
    CHECK((s - north.location).norm() == doctest::Approx(1e-4).epsilon(1e-3));
  }
  // Pairs are +- along each eigenvector.
  CHECK((seeds[0] + seeds[1] - 2 * north.location).norm() < 1e-7);
  CHECK(flow::unstable_seeds(fx.sc.manifold, fx.census.points[0]).empty());

  Fixture torus("torus_upright");
  CHECK(flow::unstable_seeds(torus.sc.manifold, torus.census.points[2]).size() == 2);
}

TEST_CASE("configuration validation") {
  flow::FlowConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.rel_tol = 0;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
  cfg = {};
  CHECK_THROWS_AS(cfg.validate(1e-4), PreconditionError);
  morse::GeometricConstants k;
  k.r = 1e-3;
  CHECK(flow::FlowConfig::for_constants(k).capture_radius == doctest::Approx(5e-4));
  CHECK(flow::to_string(flow::Terminal::Stalled) == "stalled");
}
