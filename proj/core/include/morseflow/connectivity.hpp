#pragma once

// Orbit connection graph between critical points, basin sampling and
// constancy propagation along flow lines.

#include "morseflow/flow.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace morseflow::connectivity {

using geometry::Vector;

struct Witness {
  std::size_t trajectory = 0;  // index into ConnectionGraph::trajectories
  int eigendirection = 0;      // eigenvalue index at the source point
  int sign = 1;                // seed side, +1 or -1
};

struct Edge {
  int from = 0;
  int to = 0;
  std::vector<Witness> witnesses;
};

struct ConnectionGraph {
  std::vector<int> nodes;
  std::vector<Edge> edges;  // sorted by (from, to); one entry per distinct pair
  std::vector<flow::Trajectory> trajectories;

  /// Undirected adjacency lists indexed by node id.
  std::vector<std::vector<int>> undirected_adjacency() const;
  /// Directed adjacency lists (from -> to).
  std::vector<std::vector<int>> directed_adjacency() const;
  bool has_edge(int from, int to) const;
};

/// Flows forward from every unstable seed of every positive-index point.
/// Throws UnregisteredCriticalPoint if a seed flow stalls and
/// ConvergenceError if one reaches t_max.
ConnectionGraph build_connection_graph(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                                       const std::vector<morse::CriticalPoint>& crits, const flow::FlowConfig& cfg,
                                       double eps = 1e-4);

struct Connectedness {
  bool connected = false;
  std::vector<std::vector<int>> components;  // sorted node ids, sorted by first id
};

Connectedness check_connected(const ConnectionGraph& g);

struct BasinReport {
  std::size_t n_samples = 0;
  std::map<int, std::size_t> tally;  // critical point id -> count
  double minima_fraction = 0;
  std::size_t unresolved = 0;        // Stalled or MaxTimeReached
};

BasinReport basin_sample(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                         const std::vector<morse::CriticalPoint>& crits, const flow::FlowConfig& cfg, std::size_t n,
                         std::uint64_t seed);

/// Same tally for caller-supplied start points.
BasinReport basin_from_points(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                              const std::vector<morse::CriticalPoint>& crits, const flow::FlowConfig& cfg,
                              const std::vector<Vector>& points);

enum class ConstancyStatus { Constant, NotConstant, NotApplicable };

struct ConstancyVerdict {
  ConstancyStatus status = ConstancyStatus::NotApplicable;
  bool constant = false;
  /// NotApplicable: sample point where |du(grad f)| is largest.
  /// Otherwise: the pair of evaluation points with the largest deviation.
  Vector witness;
  Vector witness_other;
  double deviation = 0;  // max |du(grad f)| or max value spread
};

/// Tests that du(grad f) ~ 0 on 500 samples, then compares the field values
/// at all critical points and witness trajectory endpoints. Throws
/// PreconditionError if the graph is disconnected.
ConstancyVerdict propagate_constancy(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                                     const std::vector<morse::CriticalPoint>& crits, const ConnectionGraph& g,
                                     const std::vector<symbolics::Expression>& field, double tol = 1e-6,
                                     std::uint64_t seed = 0, std::size_t n_samples = 500);

}  // namespace morseflow::connectivity
