#pragma once

// Machine-readable reports. JSON numbers are printed with 17 significant
// digits ("%.17g") so output is byte-identical across reruns; non-finite
// values become null. Schemas live in schemas/*.schema.json.

#include "morseflow/catalog.hpp"
#include "morseflow/connectivity.hpp"
#include "morseflow/linearization.hpp"
#include "morseflow/transport.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace morseflow::report {

using geometry::Vector;

inline constexpr int kSchemaVersion = 1;

struct CensusReport {
  const catalog::Scenario* scenario = nullptr;
  std::uint64_t seed = 0;
  const morse::Census* census = nullptr;
  std::optional<morse::GeometricConstants> constants;
  std::string constants_error;  // set when constants are unavailable
};

std::string critical_points_json(const CensusReport& r);

struct FlowReport {
  const catalog::Scenario* scenario = nullptr;
  const flow::Trajectory* trajectory = nullptr;
  std::optional<flow::LengthBoundReport> length_bound;
  double slack = 1.05;
};

std::string terminal_json(const FlowReport& r);

/// Header "t,x1,...,xn,f,grad_norm", one row per accepted sample.
std::string trajectory_csv(const flow::Trajectory& traj);

struct GraphReport {
  const catalog::Scenario* scenario = nullptr;
  const std::vector<morse::CriticalPoint>* crits = nullptr;
  const connectivity::ConnectionGraph* graph = nullptr;
  connectivity::Connectedness connectedness;
};

std::string graph_json(const GraphReport& r);
/// Directed graph; node labels "id:index:value".
std::string graph_dot(const GraphReport& r);

struct DecayRun {
  const catalog::Scenario* scenario = nullptr;
  std::uint64_t seed = 0;
  Vector x0;
  Vector v0;
  const linearization::VariationalSeries* series = nullptr;
  linearization::EnergyCheck energy;
  std::optional<linearization::DecayReport> decay;
  std::string decay_error;
};

std::string decay_json(const DecayRun& r);

struct BasinRun {
  const catalog::Scenario* scenario = nullptr;
  std::uint64_t seed = 0;
  const std::vector<morse::CriticalPoint>* crits = nullptr;
  connectivity::BasinReport basin;
};

std::string basin_json(const BasinRun& r);

struct FlatnessRun {
  const catalog::Scenario* scenario = nullptr;
  std::uint64_t seed = 0;
  transport::FlatnessVerdict verdict;
  std::vector<double> sectional;  // sectional curvature per sample
};

std::string flatness_json(const FlatnessRun& r);

/// Writes via a temporary file in the same directory and renames it into
/// place. Throws ConfigError on I/O failure.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace morseflow::report
