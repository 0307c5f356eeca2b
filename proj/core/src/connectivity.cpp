#include "morseflow/connectivity.hpp"

#include "morseflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

namespace morseflow::connectivity {

std::vector<std::vector<int>> ConnectionGraph::undirected_adjacency() const {
  const int n = nodes.empty() ? 0 : *std::max_element(nodes.begin(), nodes.end()) + 1;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& e : edges) {
    adj[static_cast<std::size_t>(e.from)].push_back(e.to);
    adj[static_cast<std::size_t>(e.to)].push_back(e.from);
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

std::vector<std::vector<int>> ConnectionGraph::directed_adjacency() const {
  const int n = nodes.empty() ? 0 : *std::max_element(nodes.begin(), nodes.end()) + 1;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& e : edges) adj[static_cast<std::size_t>(e.from)].push_back(e.to);
  return adj;
}

bool ConnectionGraph::has_edge(int from, int to) const {
  return std::any_of(edges.begin(), edges.end(), [&](const Edge& e) { return e.from == from && e.to == to; });
}

ConnectionGraph build_connection_graph(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                                       const std::vector<morse::CriticalPoint>& crits, const flow::FlowConfig& cfg,
                                       double eps) {
  struct Job {
    int from;
    int direction;
    int sign;
    Vector seed;
  };
  std::vector<Job> jobs;
  for (const auto& p : crits) {
    if (p.index < 1) continue;
    std::vector<Vector> seeds = flow::unstable_seeds(m, p, eps);
    std::size_t s = 0;
    for (Eigen::Index k = 0; k < p.eigenvalues.size(); ++k) {
      if (!(p.eigenvalues(k) < 0)) continue;
      jobs.push_back({p.id, static_cast<int>(k), +1, seeds[s++]});
      jobs.push_back({p.id, static_cast<int>(k), -1, seeds[s++]});
    }
  }

  ConnectionGraph g;
  for (const auto& c : crits) g.nodes.push_back(c.id);
  g.trajectories = parallel_map(jobs.size(), [&](std::size_t i) {
    return flow::integrate_flow(m, f, jobs[i].seed, cfg, crits, flow::Direction::Forward);
  });

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const flow::Trajectory& t = g.trajectories[i];
    if (t.terminal == flow::Terminal::Stalled)
      throw UnregisteredCriticalPoint("unstable seed flow of critical point " + std::to_string(jobs[i].from) +
                                      " stalled at an unregistered critical point; re-run find_critical_points "
                                      "with more starts");
    if (t.terminal != flow::Terminal::Converged)
      throw ConvergenceError("unstable seed flow of critical point " + std::to_string(jobs[i].from) +
                             " did not converge before t_max");
    Witness w{i, jobs[i].direction, jobs[i].sign};
    auto it = std::find_if(g.edges.begin(), g.edges.end(),
                           [&](const Edge& e) { return e.from == jobs[i].from && e.to == t.limit_id; });
    if (it == g.edges.end()) {
      g.edges.push_back({jobs[i].from, t.limit_id, {w}});
    } else {
      it->witnesses.push_back(w);
    }
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  for (auto& e : g.edges)
    std::sort(e.witnesses.begin(), e.witnesses.end(), [](const Witness& a, const Witness& b) {
      if (a.eigendirection != b.eigendirection) return a.eigendirection < b.eigendirection;
      return a.sign > b.sign;
    });
  return g;
}

Connectedness check_connected(const ConnectionGraph& g) {
  const int n = g.nodes.empty() ? 0 : *std::max_element(g.nodes.begin(), g.nodes.end()) + 1;
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  };
  for (const auto& e : g.edges) {
    const int ra = find(e.from), rb = find(e.to);
    if (ra != rb) parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
  }
  std::map<int, std::vector<int>> groups;
  for (int id : g.nodes) groups[find(id)].push_back(id);
  Connectedness c;
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end());
    c.components.push_back(members);
  }
  std::sort(c.components.begin(), c.components.end());
  c.connected = c.components.size() == 1;
  return c;
}

BasinReport basin_from_points(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                              const std::vector<morse::CriticalPoint>& crits, const flow::FlowConfig& cfg,
                              const std::vector<Vector>& points) {
  std::vector<int> limits = parallel_map(points.size(), [&](std::size_t i) {
    flow::Trajectory t = flow::integrate_flow(m, f, points[i], cfg, crits, flow::Direction::Forward);
    return t.terminal == flow::Terminal::Converged ? t.limit_id : -1;
  });
  BasinReport rep;
  rep.n_samples = points.size();
  std::size_t minima = 0;
  for (int id : limits) {
    if (id < 0) {
      ++rep.unresolved;
      continue;
    }
    ++rep.tally[id];
    if (crits[static_cast<std::size_t>(id)].index == 0) ++minima;
  }
  rep.minima_fraction = rep.n_samples ? static_cast<double>(minima) / static_cast<double>(rep.n_samples) : 0.0;
  return rep;
}

BasinReport basin_sample(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                         const std::vector<morse::CriticalPoint>& crits, const flow::FlowConfig& cfg, std::size_t n,
                         std::uint64_t seed) {
  if (n < 1) throw PreconditionError("basin_sample: n must be at least 1");
  return basin_from_points(m, f, crits, cfg, geometry::sample_points(m, n, seed));
}

ConstancyVerdict propagate_constancy(const geometry::ImplicitManifold& m, const symbolics::Expression& f,
                                     const std::vector<morse::CriticalPoint>& crits, const ConnectionGraph& g,
                                     const std::vector<symbolics::Expression>& field, double tol,
                                     std::uint64_t seed, std::size_t n_samples) {
  if (field.empty()) throw PreconditionError("propagate_constancy: field has no components");
  if (!check_connected(g).connected)
    throw PreconditionError("propagate_constancy: connection graph is disconnected");

  ConstancyVerdict v;
  // (a) du(grad f) = 0 on samples, with exact jets.
  double worst = -1;
  for (const Vector& x : geometry::sample_points(m, n_samples, seed)) {
    const Vector grad = geometry::gradient_field(m, f, x);
    Vector du;
    for (const auto& comp : field) {
      comp.gradient(x, du);
      const double d = std::fabs(du.dot(grad));
      if (d > worst) {
        worst = d;
        v.witness = x;
      }
    }
  }
  if (worst > tol) {
    v.status = ConstancyStatus::NotApplicable;
    v.deviation = worst;
    return v;
  }

  // (b) values at critical points and at witness endpoints.
  std::vector<Vector> points;
  for (const auto& c : crits) points.push_back(c.location);
  for (const auto& t : g.trajectories) {
    if (t.samples.empty()) continue;
    points.push_back(t.samples.front().x);
    points.push_back(t.samples.back().x);
  }
  std::vector<Vector> values;
  for (const auto& p : points) {
    Vector val(static_cast<Eigen::Index>(field.size()));
    for (std::size_t c = 0; c < field.size(); ++c) val(static_cast<Eigen::Index>(c)) = field[c].value(p);
    values.push_back(val);
  }
  double spread = 0;
  std::size_t wa = 0, wb = 0;
  for (std::size_t a = 0; a < values.size(); ++a)
    for (std::size_t b = a + 1; b < values.size(); ++b) {
      const double d = (values[a] - values[b]).lpNorm<Eigen::Infinity>();
      if (d > spread) {
        spread = d;
        wa = a;
        wb = b;
      }
    }
  v.deviation = spread;
  v.constant = spread <= tol;
  v.status = v.constant ? ConstancyStatus::Constant : ConstancyStatus::NotConstant;
  v.witness = points[wa];
  v.witness_other = points[wb];
  return v;
}

}  // namespace morseflow::connectivity
