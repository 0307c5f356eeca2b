#include "morseflow/catalog.hpp"
#include "morseflow/flow.hpp"
#include "morseflow/transport.hpp"

#include <benchmark/benchmark.h>

using namespace morseflow;

namespace {

const catalog::Scenario& scenario(const char* name) {
  static const catalog::Scenario sphere = catalog::load_scenario("sphere2");
  static const catalog::Scenario torus = catalog::load_scenario("torus_upright");
  static const catalog::Scenario clifford = catalog::load_scenario("clifford");
  const std::string_view n(name);
  return n == "sphere2" ? sphere : n == "torus_upright" ? torus : clifford;
}

void BM_Jet(benchmark::State& state) {
  const auto e = symbolics::parse("(x1^2 + x2^2 + x3^2 + 3)^2 - 16*(x1^2 + x2^2)", 3);
  Eigen::VectorXd x(3);
  x << 0.5, 2.6, 0.8;
  for (auto _ : state) benchmark::DoNotOptimize(e.jet(x));
}
BENCHMARK(BM_Jet);

void BM_Retract(benchmark::State& state) {
  const auto& sc = scenario("torus_upright");
  Eigen::VectorXd x(3);
  x << 0.5, 2.6, 0.8;
  for (auto _ : state) benchmark::DoNotOptimize(geometry::retract(sc.manifold, x));
}
BENCHMARK(BM_Retract);

void BM_FlowToCapture(benchmark::State& state) {
  const auto& sc = scenario("clifford");
  const auto census = morse::find_critical_points(sc.manifold, sc.function, sc.census_starts, 0, sc.census);
  const auto x0 = geometry::sample_points(sc.manifold, 1, 3).front();
  for (auto _ : state)
    benchmark::DoNotOptimize(flow::integrate_flow(sc.manifold, sc.function, x0, sc.integrator, census.points));
}
BENCHMARK(BM_FlowToCapture)->Unit(benchmark::kMillisecond);

void BM_HolonomyCurvature(benchmark::State& state) {
  const auto& sc = scenario("sphere2");
  const auto x = geometry::sample_points(sc.manifold, 1, 3).front();
  const auto [u, v] = transport::random_tangent_plane(sc.manifold, x, 1);
  for (auto _ : state) benchmark::DoNotOptimize(transport::holonomy_curvature(sc.manifold, x, u, v));
}
BENCHMARK(BM_HolonomyCurvature)->Unit(benchmark::kMillisecond);

void BM_Census(benchmark::State& state) {
  const auto& sc = scenario("torus_upright");
  for (auto _ : state)
    benchmark::DoNotOptimize(
        morse::find_critical_points(sc.manifold, sc.function, sc.census_starts, 0, sc.census));
}
BENCHMARK(BM_Census)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
