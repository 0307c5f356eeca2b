#pragma once

// Scenarios: a manifold, a function on it, solver settings and (for the
// built-in catalog) the analytic ground truth. Scenario files use the
// config format of config.hpp; see docs/formats.md for the key reference.

#include "morseflow/config.hpp"
#include "morseflow/flow.hpp"
#include "morseflow/geometry.hpp"
#include "morseflow/morse.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace morseflow::catalog {

enum class CurvatureClass { Unspecified, Flat, ConstantPositive };

std::string to_string(CurvatureClass c);

struct Expected {
  std::vector<double> critical_values;  // ascending, one per point
  std::vector<int> indices;             // same order
  std::vector<double> lambda_min;       // one per minimum, in id order
  int euler_characteristic = 0;
  std::vector<std::pair<int, int>> edges;  // directed (from, to) by critical point id
  CurvatureClass curvature = CurvatureClass::Unspecified;
  double sectional_curvature = 0;          // for ConstantPositive
};

struct Seeds {
  std::uint64_t census = 0;
  std::uint64_t sampling = 0;
};

struct Scenario {
  std::string name;
  std::string description;
  std::string source;  // catalog name or file path
  std::vector<std::string> constraint_text;
  std::string function_text;
  geometry::ImplicitManifold manifold;
  symbolics::Expression function;
  int census_starts = 64;
  morse::CensusOptions census;
  flow::FlowConfig integrator;
  Seeds seeds;
  std::optional<Expected> expected;

  bool flat() const { return expected && expected->curvature == CurvatureClass::Flat; }
};

/// Parses scenario text. Throws ParseError (line/column set) for syntax,
/// unknown keys, malformed values and inconsistent expected data.
Scenario parse_scenario(std::string_view text, std::string source = "<input>");

/// Reads and parses a scenario file. Throws ConfigError if unreadable.
Scenario load_scenario_file(const std::string& path);

std::vector<std::string> list_scenarios();

/// Built-in scenario by name; "sphereM:<m>" builds the m-sphere. Throws
/// ConfigError listing the available names on a miss.
Scenario load_scenario(std::string_view name);

/// Raw text of a built-in scenario file.
std::string_view scenario_text(std::string_view name);

/// Scenario text for the unit m-sphere in R^{m+1} with f = a.x, a = (1,...,1)/sqrt(m+1).
std::string sphere_m_text(int m);

/// Catalog name if `spec` is one; otherwise a scenario file path. Names of
/// the form "sphereM:<m>" always resolve to the catalog.
Scenario resolve_scenario(std::string_view spec);

}  // namespace morseflow::catalog
