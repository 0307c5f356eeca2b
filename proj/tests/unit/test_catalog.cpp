#include "morseflow/catalog.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

using namespace morseflow;

namespace {

ParseError scenario_error(std::string_view text) {
  try {
    catalog::parse_scenario(text, "user.scn");
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error");
  return ParseError("", 0);
}

const char* kMinimal =
    "[scenario]\n"
    "name = circle\n"
    "[manifold]\n"
    "ambient_dim = 2\n"
    "constraint.1 = x1^2 + x2^2 - 1\n"
    "box.lo = -2 -2\n"
    "box.hi = 2 2\n"
    "[function]\n"
    "f = x2\n";

}  // namespace

TEST_CASE("catalog lists its scenarios") {
  const auto names = catalog::list_scenarios();
  CHECK(names == std::vector<std::string>{"clifford", "sphere2", "sphereM", "torus_upright"});
}

TEST_CASE("sphere2 has Euler characteristic two") {
  const auto sc = catalog::load_scenario("sphere2");
  REQUIRE(sc.expected);
  CHECK(sc.expected->euler_characteristic == 2);
  CHECK(sc.expected->curvature == catalog::CurvatureClass::ConstantPositive);
  CHECK(sc.expected->sectional_curvature == 1);
  CHECK(sc.manifold.ambient_dim() == 3);
  CHECK(sc.manifold.dim() == 2);
  CHECK_FALSE(sc.flat());
}

TEST_CASE("clifford is flagged flat") {
  const auto sc = catalog::load_scenario("clifford");
  CHECK(sc.flat());
  CHECK(sc.manifold.codim() == 2);
  REQUIRE(sc.expected);
  CHECK(sc.expected->lambda_min.at(0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(sc.expected->edges == std::vector<std::pair<int, int>>{{1, 0}, {2, 0}, {3, 1}, {3, 2}});
}

TEST_CASE("torus expected table") {
  const auto sc = catalog::load_scenario("torus_upright");
  REQUIRE(sc.expected);
  CHECK(sc.expected->critical_values == std::vector<double>{-3, -1, 1, 3});
  CHECK(sc.expected->indices == std::vector<int>{0, 1, 1, 2});
  CHECK(sc.expected->lambda_min.at(0) == doctest::Approx(1.0 / 3));
  CHECK(sc.expected->euler_characteristic == 0);
  CHECK(sc.census_starts == 128);
}

TEST_CASE("unknown scenario lists the available names") {
  try {
    catalog::load_scenario("unknown");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const auto& name : catalog::list_scenarios()) CHECK(msg.find(name) != std::string::npos);
    CHECK(msg.find("sphereM:<m>") != std::string::npos);
  }
}

TEST_CASE("sphereM generator") {
  CHECK(catalog::sphere_m_text(4) == catalog::scenario_text("sphereM"));
  const auto s7 = catalog::load_scenario("sphereM:7");
  CHECK(s7.manifold.ambient_dim() == 8);
  REQUIRE(s7.expected);
  CHECK(s7.expected->indices == std::vector<int>{0, 7});
  CHECK(s7.expected->euler_characteristic == 0);  // odd-dimensional sphere
  CHECK(catalog::load_scenario("sphereM:6").expected->euler_characteristic == 2);
  const auto s1 = catalog::load_scenario("sphereM:1");
  CHECK(s1.expected->euler_characteristic == 0);
  CHECK_THROWS_AS(catalog::load_scenario("sphereM:0"), ConfigError);
  CHECK_THROWS_AS(catalog::load_scenario("sphereM:x"), ConfigError);
  CHECK_THROWS_AS(catalog::sphere_m_text(31), ConfigError);
}

TEST_CASE("minimal user scenario takes defaults") {
  const auto sc = catalog::parse_scenario(kMinimal, "circle.scn");
  CHECK(sc.name == "circle");
  CHECK(sc.source == "circle.scn");
  CHECK(sc.manifold.dim() == 1);
  CHECK(sc.census_starts == 64);
  CHECK(sc.integrator.rel_tol == 1e-8);
  CHECK(sc.integrator.t_max == 200);
  CHECK_FALSE(sc.expected);
  CHECK(sc.function_text == "x2");
}

TEST_CASE("scenario errors are located") {
  auto e = scenario_error("[scenario]\nname = a\n[manifold]\nambient_dim = 2\nconstraint.1 = x1^2 + x3\n"
                          "box.lo = -2 -2\nbox.hi = 2 2\n[function]\nf = x2\n");
  CHECK(e.line() == 5);
  CHECK(e.column() > 15);

  e = scenario_error(std::string(kMinimal) + "[extra]\nk = 1\n");
  CHECK(e.line() == 10);

  e = scenario_error(std::string(kMinimal) + "[census]\nstarts = many\n");
  CHECK(e.line() == 11);

  e = scenario_error(std::string(kMinimal) + "[census]\nbogus = 1\n");
  CHECK(e.line() == 11);

  // Gap in constraint numbering.
  e = scenario_error("[scenario]\nname = a\n[manifold]\nambient_dim = 2\nconstraint.2 = x1^2 + x2^2 - 1\n"
                     "box.lo = -2 -2\nbox.hi = 2 2\n[function]\nf = x2\n");
  CHECK(e.line() == 5);

  // Index parity sum disagrees with the Euler characteristic.
  e = scenario_error(std::string(kMinimal) +
                     "[expected]\ncritical_values = -1 1\nindices = 0 1\neuler_characteristic = 2\n");
  CHECK(e.line() >= 10);

  // Values must ascend.
  e = scenario_error(std::string(kMinimal) + "[expected]\ncritical_values = 1 -1\nindices = 0 1\n");
  CHECK(e.line() >= 10);

  // The sampling box is mandatory.
  e = scenario_error("[scenario]\nname = a\n[manifold]\nambient_dim = 2\nconstraint.1 = x1^2 + x2^2 - 1\n"
                     "[function]\nf = x2\n");
  CHECK(e.line() == 3);

  CHECK_THROWS_AS(catalog::parse_scenario("[scenario]\nname = a\n"), ParseError);
}

TEST_CASE("scenario files on disk") {
  const std::string path = "test_catalog_circle.scn";
  {
    std::ofstream out(path);
    out << kMinimal;
  }
  const auto sc = catalog::load_scenario_file(path);
  CHECK(sc.name == "circle");
  const auto resolved = catalog::resolve_scenario(path);
  CHECK(resolved.source == path);
  CHECK(catalog::resolve_scenario("sphere2").name == "sphere2");
  std::remove(path.c_str());
  CHECK_THROWS_AS(catalog::load_scenario_file(path), ConfigError);
}

TEST_CASE("every catalog scenario round-trips through its text") {
  for (const auto& name : catalog::list_scenarios()) {
    CAPTURE(name);
    const auto a = catalog::load_scenario(name);
    const auto b = catalog::parse_scenario(catalog::scenario_text(name), name);
    CHECK(a.function == b.function);
    CHECK(a.constraint_text == b.constraint_text);
    REQUIRE(a.expected);
    int parity = 0;
    for (int idx : a.expected->indices) parity += idx % 2 == 0 ? 1 : -1;
    CHECK(parity == a.expected->euler_characteristic);
  }
}

TEST_CASE("curvature class names") {
  CHECK(catalog::to_string(catalog::CurvatureClass::Flat) == "flat");
  CHECK(catalog::to_string(catalog::CurvatureClass::ConstantPositive) == "constant-positive");
  CHECK(catalog::to_string(catalog::CurvatureClass::Unspecified) == "unspecified");
}
