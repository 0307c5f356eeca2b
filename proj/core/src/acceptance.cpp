#include "morseflow/acceptance.hpp"

#include "morseflow/connectivity.hpp"
#include "morseflow/linearization.hpp"
#include "morseflow/parallel.hpp"
#include "morseflow/report.hpp"
#include "morseflow/transport.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <set>

namespace morseflow::acceptance {

using geometry::Matrix;
using geometry::Vector;

namespace {

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Loaded {
  catalog::Scenario scenario;
  morse::Census census;
  double census_seconds = 0;
  std::optional<connectivity::ConnectionGraph> graph;
};

// Scenario, census and graph per catalog name, computed on first use.
class Context {
 public:
  explicit Context(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  Loaded& get(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return *it->second;
    auto entry = std::make_unique<Loaded>(Loaded{catalog::load_scenario(name), {}, 0, {}});
    Stopwatch sw;
    const auto& s = entry->scenario;
    entry->census = morse::find_critical_points(s.manifold, s.function, s.census_starts, s.seeds.census + seed_,
                                                s.census);
    entry->census_seconds = sw.seconds();
    return *cache_.emplace(name, std::move(entry)).first->second;
  }

  const connectivity::ConnectionGraph& graph(const std::string& name) {
    Loaded& l = get(name);
    if (!l.graph)
      l.graph = connectivity::build_connection_graph(l.scenario.manifold, l.scenario.function, l.census.points,
                                                     l.scenario.integrator);
    return *l.graph;
  }

 private:
  std::uint64_t seed_;
  std::map<std::string, std::unique_ptr<Loaded>> cache_;
};

class Criterion {
 public:
  Criterion(int number, std::string name, double budget) {
    r_.number = number;
    r_.name = std::move(name);
    r_.budget_seconds = budget;
  }

  void check(bool ok, const std::string& line) {
    r_.details.push_back((ok ? "ok    " : "FAIL  ") + line);
    all_ &= ok;
  }

  CriterionResult finish() {
    r_.seconds = sw_.seconds();
    const bool in_budget = r_.seconds <= r_.budget_seconds;
    if (!in_budget) r_.details.push_back("FAIL  runtime " + g(r_.seconds) + " s exceeds " + g(r_.budget_seconds) + " s");
    r_.pass = all_ && in_budget && !r_.details.empty();
    return r_;
  }

 private:
  CriterionResult r_;
  bool all_ = true;
  Stopwatch sw_;
};

const std::vector<std::string> kCensusScenarios = {"sphere2", "torus_upright", "clifford"};

std::vector<std::string> all_scenarios() { return catalog::list_scenarios(); }

// 1. Counts, indices, values and Euler characteristic against the catalog.
void census(Context& ctx, Criterion& c) {
  for (const auto& name : kCensusScenarios) {
    const Loaded& l = ctx.get(name);
    const catalog::Expected& ex = *l.scenario.expected;
    const auto& pts = l.census.points;
    bool ok = pts.size() == ex.critical_values.size();
    double worst = 0;
    for (std::size_t i = 0; ok && i < pts.size(); ++i) {
      ok &= pts[i].index == ex.indices[i];
      worst = std::max(worst, std::fabs(pts[i].value - ex.critical_values[i]));
    }
    ok &= worst <= 1e-6;
    const int chi = morse::euler_characteristic(pts);
    c.check(ok && chi == ex.euler_characteristic && morse::is_morse(pts),
            name + ": " + std::to_string(pts.size()) + " points, max value error " + g(worst) + ", chi " +
                std::to_string(chi) + " (expected " + std::to_string(ex.euler_characteristic) + ")");
    c.check(l.census_seconds < 10, name + ": census took " + g(l.census_seconds) + " s (< 10 s)");
  }
}

// 2. Every catalog graph is connected and matches the oracle edges.
void connected(Context& ctx, Criterion& c) {
  for (const auto& name : all_scenarios()) {
    const Loaded& l = ctx.get(name);
    const auto& g = ctx.graph(name);
    const bool conn = connectivity::check_connected(g).connected;
    std::set<std::pair<int, int>> got, want(l.scenario.expected->edges.begin(), l.scenario.expected->edges.end());
    for (const auto& e : g.edges) got.emplace(e.from, e.to);
    c.check(conn && got == want, name + ": connected = " + (conn ? "true" : "false") + ", " +
                                     std::to_string(got.size()) + " edges" +
                                     (got == want ? " matching the catalog" : " differing from the catalog"));
    if (name == "torus_upright") {
      bool saddle_saddle = false;
      for (const auto& e : g.edges)
        saddle_saddle |= l.census.points[static_cast<std::size_t>(e.from)].index == 1 &&
                         l.census.points[static_cast<std::size_t>(e.to)].index == 1;
      c.check(saddle_saddle, "torus_upright: saddle -> saddle edge present");
    }
  }
}

// 3. z(t) = -tanh t on the sphere from the equator.
void flow_oracle(Context& ctx, Criterion& c) {
  const Loaded& l = ctx.get("sphere2");
  Vector x0(3);
  x0 << 1, 0, 0;
  for (double t : {0.5, 1.0, 2.0}) {
    flow::FlowConfig cfg = l.scenario.integrator;
    cfg.t_max = t;
    cfg.stop_at_capture = false;
    const flow::Trajectory tr = flow::integrate_flow(l.scenario.manifold, l.scenario.function, x0, cfg, {});
    const double err = std::fabs(tr.samples.back().x(2) + std::tanh(t));
    c.check(err < 1e-6 && tr.samples.back().t == t, "t = " + g(t) + ": |z + tanh t| = " + g(err));
  }
}

// 4. Length outside the critical balls is bounded by the value drop over c.
void length_bound(Context& ctx, Criterion& c) {
  for (const auto& name : all_scenarios()) {
    const Loaded& l = ctx.get(name);
    const auto& s = l.scenario;
    const morse::GeometricConstants k =
        morse::geometric_constants(s.manifold, s.function, l.census.points, 2000, s.seeds.sampling + ctx.seed());
    flow::FlowConfig cfg = s.integrator;
    cfg.capture_radius = std::min(cfg.capture_radius, 0.5 * k.r);
    const auto starts = geometry::sample_points(s.manifold, 50, s.seeds.sampling + ctx.seed() + 4);
    const auto reports = parallel_map(starts.size(), [&](std::size_t i) {
      const flow::Trajectory t = flow::integrate_flow(s.manifold, s.function, starts[i], cfg, l.census.points);
      return flow::check_length_bound(t, l.census.points, k, 1.05);
    });
    std::size_t passed = 0;
    double worst = 0;
    for (const auto& r : reports) {
      passed += r.pass ? 1 : 0;
      for (const auto& seg : r.segments)
        if (seg.drop > 0) worst = std::max(worst, seg.length / (seg.drop / k.c_floor));
    }
    c.check(passed == starts.size(), name + ": " + std::to_string(passed) + "/" + std::to_string(starts.size()) +
                                         " trajectories within 5% slack (c = " + g(k.c_floor) +
                                         ", worst length/bound " + g(worst) + ")");
  }
}

// 5. dE/dt against the Hessian form along two series.
void energy(Context& ctx, Criterion& c) {
  struct Case {
    std::string name;
    Vector x0;
    Vector v0;
  };
  std::vector<Case> cases;
  {
    Vector x(3), v(3);
    x << 1, 0, 0;
    v << 0, 1, 1;
    cases.push_back({"sphere2", x, v.normalized()});
  }
  {
    const double a = 2 * M_PI / 3, h = 1 / std::sqrt(2.0);
    Vector x(4), t1(4), t2(4);
    x << h * std::cos(a), h * std::sin(a), h * std::cos(a), h * std::sin(a);
    t1 << -std::sin(a), std::cos(a), 0, 0;
    t2 << 0, 0, -std::sin(a), std::cos(a);
    cases.push_back({"clifford", x, (t1 + 2 * t2).normalized()});
  }
  for (const auto& k : cases) {
    const Loaded& l = ctx.get(k.name);
    const auto& s = l.scenario;
    const auto series = linearization::integrate_variational(s.manifold, s.function, k.x0, Matrix(k.v0), s.integrator,
                                                             l.census.points);
    const auto e = linearization::check_energy_ode(series, s.manifold, s.function, 0);
    c.check(e.max_relative_residual < 1e-2 && e.samples_checked > 100,
            k.name + ": max relative residual " + g(e.max_relative_residual) + " over " +
                std::to_string(e.samples_checked) + " samples");
  }
}

// 6. Fitted decay rate of |V| against the smallest Hessian eigenvalue.
void rates(Context& ctx, Criterion& c) {
  for (const auto& name : kCensusScenarios) {
    const Loaded& l = ctx.get(name);
    const auto& s = l.scenario;
    const auto& pts = l.census.points;
    std::map<int, double> expected;  // minimum id -> lambda_min
    std::size_t k = 0;
    for (const auto& p : pts)
      if (p.index == 0 && k < s.expected->lambda_min.size()) expected[p.id] = s.expected->lambda_min[k++];

    struct Trial {
      double gap = 1;
      int reseeds = 0;
      std::string error;
    };
    const auto trials = parallel_map(10, [&](std::size_t i) {
      Trial t;
      for (int attempt = 0; attempt < 5; ++attempt) {
        const std::uint64_t seed = s.seeds.sampling + ctx.seed() + 6000 + 97 * i + 1000003ULL * attempt;
        const Vector x0 = geometry::sample_points(s.manifold, 1, seed).front();
        const Vector v0 = transport::random_tangent_plane(s.manifold, x0, seed).first;
        const auto series = linearization::integrate_variational(s.manifold, s.function, x0, Matrix(v0),
                                                                 s.integrator, pts);
        if (series.terminal != flow::Terminal::Converged || pts[static_cast<std::size_t>(series.limit_id)].index != 0) {
          ++t.reseeds;
          continue;
        }
        const auto& limit = pts[static_cast<std::size_t>(series.limit_id)];
        const Vector vend = series.samples.back().vectors.col(0);
        double slow = 0;
        for (Eigen::Index j = 0; j < limit.eigenvalues.size(); ++j)
          if (limit.eigenvalues(j) - limit.eigenvalues(0) < 1e-6 * std::max(1.0, std::fabs(limit.eigenvalues(0))))
            slow += std::pow(limit.eigenvectors.col(j).dot(vend), 2);
        if (std::sqrt(slow) < 1e-6 * vend.norm()) {
          ++t.reseeds;
          continue;
        }
        try {
          const auto rep = linearization::fit_decay_rate(series, pts, 0);
          t.gap = std::fabs(rep.c_fit - expected.at(limit.id)) / expected.at(limit.id);
        } catch (const Error& e) {
          t.error = e.what();
        }
        return t;
      }
      t.error = "no admissible (x0, v0) after 5 draws";
      return t;
    });
    double worst = 0;
    int reseeds = 0;
    std::string error;
    for (const auto& t : trials) {
      worst = std::max(worst, t.gap);
      reseeds += t.reseeds;
      if (!t.error.empty()) error = t.error;
    }
    c.check(worst < 0.05 && error.empty(), name + ": worst relative gap " + g(worst) + " over 10 trials (lambda_min " +
                                               g(expected.empty() ? 0 : expected.begin()->second) + ", " +
                                               std::to_string(reseeds) + " redraws)" + (error.empty() ? "" : ", " + error));
  }
}

// 7. Almost every start flows to a minimum.
void basins(Context& ctx, Criterion& c) {
  const std::map<std::string, double> thresholds = {{"sphere2", 0.999}, {"clifford", 0.999}, {"torus_upright", 0.995}};
  for (const auto& [name, threshold] : thresholds) {
    const Loaded& l = ctx.get(name);
    const auto& s = l.scenario;
    const auto rep = connectivity::basin_sample(s.manifold, s.function, l.census.points, s.integrator, 2000, ctx.seed());
    c.check(rep.minima_fraction >= threshold, name + ": minima fraction " + g(rep.minima_fraction) + " (>= " +
                                                  g(threshold) + ", " + std::to_string(rep.unresolved) + " unresolved)");
  }
}

// 8. Transport keeps frames orthonormal; holonomy recovers the curvature.
void curvature(Context& ctx, Criterion& c) {
  for (const auto& name : all_scenarios()) {
    const Loaded& l = ctx.get(name);
    const auto& s = l.scenario;
    const auto starts = geometry::sample_points(s.manifold, 10, s.seeds.sampling + ctx.seed() + 8);
    struct Drift {
      double gram = 0;
      double frame = 0;
    };
    const auto drifts = parallel_map(starts.size(), [&](std::size_t i) {
      const flow::Trajectory t = flow::integrate_flow(s.manifold, s.function, starts[i], s.integrator, l.census.points);
      const auto tf = transport::parallel_transport(s.manifold, t, geometry::tangent_basis(s.manifold, starts[i]));
      Drift d{tf.max_gram_deviation, 0};
      for (std::size_t k = 0; k < tf.frames.size(); ++k) {
        const Matrix& w = tf.frames[k];
        d.frame = std::max(d.frame, (w.transpose() * w - Matrix::Identity(w.cols(), w.cols())).cwiseAbs().maxCoeff());
        for (Eigen::Index j = 0; j < w.cols(); ++j)
          d.frame = std::max(d.frame, geometry::tangency_residual(s.manifold, tf.points[k], w.col(j)));
      }
      return d;
    });

    const auto points = geometry::sample_points(s.manifold, 50, s.seeds.sampling + ctx.seed() + 80);
    const auto samples = parallel_map(points.size(), [&](std::size_t i) {
      const auto [u, v] = transport::random_tangent_plane(s.manifold, points[i], ctx.seed() + 800 + i);
      return transport::holonomy_curvature(s.manifold, points[i], u, v);
    });
    double gram = 0, frame = 0;
    for (const auto& d : drifts) {
      gram = std::max(gram, d.gram);
      frame = std::max(frame, d.frame);
    }
    for (const auto& smp : samples) gram = std::max(gram, smp.gram_deviation);
    c.check(gram < 1e-6 && frame < 1e-7, name + ": Gram drift " + g(gram) + ", frame orthonormality/tangency " +
                                             g(frame) + " (10 flow lines, 50 holonomy loops)");

    const auto& ex = *s.expected;
    if (ex.curvature == catalog::CurvatureClass::ConstantPositive) {
      double worst = 0;
      for (const auto& smp : samples)
        worst = std::max(worst, std::fabs(smp.sectional - ex.sectional_curvature) / ex.sectional_curvature);
      c.check(worst < 0.05, name + ": sectional curvature relative error " + g(worst) + " at 50 points");
    } else if (ex.curvature == catalog::CurvatureClass::Flat) {
      double worst = 0;
      for (const auto& smp : samples) worst = std::max(worst, smp.norm);
      c.check(worst < 1e-3, name + ": max curvature norm " + g(worst) + " at 50 points");
    }
  }
}

// 9. The flatness test finds no counterexample and separates the sphere
// from the flat floor.
void flatness(Context& ctx, Criterion& c) {
  auto run = [&](const std::string& name) {
    const Loaded& l = ctx.get(name);
    const auto& s = l.scenario;
    transport::InvarianceOptions opts;
    opts.flow = s.integrator;
    return transport::flatness_test(s.manifold, s.function, l.census.points, 20, s.seeds.sampling + ctx.seed() + 9,
                                    opts);
  };
  const auto flat = run("clifford");
  const auto sphere = run("sphere2");
  c.check(flat.consistent && flat.lie_derivative_max < flat.floor && flat.curvature_max < flat.floor,
          "clifford: consistent, lie max " + g(flat.lie_derivative_max) + ", curvature max " + g(flat.curvature_max));
  c.check(sphere.consistent && sphere.lie_derivative_max > sphere.floor &&
              std::fabs(sphere.curvature_max - 1) < 0.05,
          "sphere2: consistent, lie max " + g(sphere.lie_derivative_max) + ", curvature max " +
              g(sphere.curvature_max));
  const double floor = std::max(flat.lie_derivative_max, 1e-300);
  c.check(sphere.lie_derivative_max > 10 * floor,
          "sphere lie max / flat floor = " + g(sphere.lie_derivative_max / floor) + " (> 10)");
}

// 10. Constant fields are certified constant; f = x3 on the sphere is not
// a first integral and is reported with a witness.
void constancy(Context& ctx, Criterion& c) {
  for (const auto& name : all_scenarios()) {
    const Loaded& l = ctx.get(name);
    const auto& s = l.scenario;
    const int n = s.manifold.ambient_dim();
    const auto v = connectivity::propagate_constancy(s.manifold, s.function, l.census.points, ctx.graph(name),
                                                     {symbolics::parse("1", n)}, 1e-6, ctx.seed() + 10);
    c.check(v.status == connectivity::ConstancyStatus::Constant, name + ": field 1 constant");
  }
  const Loaded& l = ctx.get("sphere2");
  const auto& s = l.scenario;
  const auto radial = connectivity::propagate_constancy(s.manifold, s.function, l.census.points, ctx.graph("sphere2"),
                                                        {symbolics::parse("x1^2 + x2^2 + x3^2", 3)}, 1e-6,
                                                        ctx.seed() + 10);
  c.check(radial.status == connectivity::ConstancyStatus::Constant,
          "sphere2: |x|^2 constant (spread " + g(radial.deviation) + ")");
  const auto height = connectivity::propagate_constancy(s.manifold, s.function, l.census.points, ctx.graph("sphere2"),
                                                        {s.function}, 1e-6, ctx.seed() + 10);
  bool valid = height.status == connectivity::ConstancyStatus::NotApplicable && height.witness.size() == 3 &&
               s.manifold.on_manifold(height.witness);
  double slope = 0;
  if (valid) {
    Vector du;
    s.function.gradient(height.witness, du);
    slope = std::fabs(du.dot(geometry::gradient_field(s.manifold, s.function, height.witness)));
    valid = slope > 1e-6 && std::fabs(slope - height.deviation) <= 1e-12 * std::max(1.0, slope);
  }
  c.check(valid, "sphere2: f = x3 not applicable, witness |du(grad f)| = " + g(slope));
}

// 11. Derivatives, variational identity at t = 0, semigroup, determinism.
void infrastructure(Context& ctx, Criterion& c) {
  const auto d = check_derivatives(100, ctx.seed() + 11);
  c.check(d.max_gradient_error < 1e-4 && d.max_hessian_error < 1e-4,
          "jets vs finite differences on " + std::to_string(d.expressions) + " expressions at " +
              std::to_string(d.points) + " points: gradient " +
              g(d.max_gradient_error) + ", Hessian " + g(d.max_hessian_error));

  for (const auto& name : all_scenarios()) {
    const Loaded& l = ctx.get(name);
    const auto& s = l.scenario;
    const Vector x = geometry::sample_points(s.manifold, 1, ctx.seed() + 110).front();
    const Matrix basis = geometry::tangent_basis(s.manifold, x);
    flow::FlowConfig cfg = s.integrator;
    cfg.t_max = 1e-4;
    cfg.stop_at_capture = false;
    const auto series = linearization::integrate_variational(s.manifold, s.function, x, basis, cfg, {});
    const Matrix& v0 = series.samples.front().vectors;
    const Matrix& vh = series.samples.back().vectors;
    Matrix predicted(basis.rows(), basis.cols());
    for (Eigen::Index j = 0; j < basis.cols(); ++j)
      predicted.col(j) = basis.col(j) - 1e-4 * linearization::field_derivative(s.manifold, s.function, x, basis.col(j));
    const double rel = (vh - predicted).norm() / (vh - basis).norm();
    c.check(v0 == basis && rel < 1e-2,
            name + ": d(phi)_0 = I exactly; d(phi)_h - I matches -h A to relative " + g(rel) + " at h = 1e-4");
  }

  {
    const Loaded& l = ctx.get("sphere2");
    const auto& s = l.scenario;
    Vector x0(3);
    x0 << 0.48, 0.6, 0.64;
    auto run = [&](const Vector& x, double t) {
      flow::FlowConfig cfg = s.integrator;
      cfg.t_max = t;
      cfg.stop_at_capture = false;
      return flow::integrate_flow(s.manifold, s.function, x, cfg, {}).samples.back().x;
    };
    const double err = (run(run(x0, 0.7), 0.9) - run(x0, 1.6)).norm();
    c.check(err < 1e-6, "semigroup on sphere2: |phi_0.9(phi_0.7 x) - phi_1.6 x| = " + g(err));
  }

  {
    auto render = [&]() {
      Context fresh(ctx.seed());
      Loaded& l = fresh.get("clifford");
      const auto& s = l.scenario;
      std::string out = report::critical_points_json({&s, ctx.seed(), &l.census, std::nullopt, "skipped"});
      const auto& graph = fresh.graph("clifford");
      out += report::graph_json({&s, &l.census.points, &graph, connectivity::check_connected(graph)});
      report::BasinRun b{&s, ctx.seed(), &l.census.points,
                         connectivity::basin_sample(s.manifold, s.function, l.census.points, s.integrator, 50,
                                                    ctx.seed())};
      out += report::basin_json(b);
      return out;
    };
    const std::string first = render(), second = render();
    c.check(first == second, "reruns at fixed seed are byte-identical (" + std::to_string(first.size()) + " bytes)");
  }
}

struct Definition {
  int number;
  const char* name;
  double budget;
  void (*body)(Context&, Criterion&);
};

const Definition kCriteria[kCriterionCount] = {
    {1, "critical-point census", 30, census},
    {2, "connection graph connectivity", 30, connected},
    {3, "flow oracle z(t) = -tanh t", 1, flow_oracle},
    {4, "length bound outside critical balls", 60, length_bound},
    {5, "variational energy identity", 10, energy},
    {6, "decay rates at minima", 60, rates},
    {7, "open dense basins of minima", 120, basins},
    {8, "transport and holonomy curvature", 60, curvature},
    {9, "flatness consistency", 60, flatness},
    {10, "constancy along connecting orbits", 10, constancy},
    {11, "infrastructure", 60, infrastructure},
};

}  // namespace

symbolics::Expression random_expression(std::mt19937_64& rng, int dim, int depth) {
  using symbolics::make_binary;
  using symbolics::make_constant;
  using symbolics::make_power;
  using symbolics::make_unary;
  using symbolics::make_variable;
  using symbolics::NodePtr;
  using symbolics::Op;
  std::uniform_int_distribution<int> var(1, dim);
  std::uniform_real_distribution<double> coef(-2, 2);
  const NodePtr one = make_constant(1);
  // Every generated subterm stays bounded by a few units on [-1, 1]^dim.
  auto build = [&](auto&& self, int d) -> NodePtr {
    std::uniform_int_distribution<int> pick(0, d <= 0 ? 1 : 10);
    switch (pick(rng)) {
      case 0:
        return make_variable(var(rng));
      case 1:
        return make_binary(Op::Mul, make_constant(coef(rng)), make_variable(var(rng)));
      case 2:
        return make_binary(Op::Add, self(self, d - 1), self(self, d - 1));
      case 3:
        return make_binary(Op::Sub, self(self, d - 1), self(self, d - 1));
      case 4:
        return make_binary(Op::Mul, self(self, d - 1), self(self, d - 1));
      case 5:
        return make_unary(Op::Sin, self(self, d - 1));
      case 6:
        return make_unary(Op::Cos, self(self, d - 1));
      case 7:
        return make_unary(Op::Exp, make_unary(Op::Sin, self(self, d - 1)));
      case 8:
        return make_unary(Op::Sqrt, make_binary(Op::Add, one, make_power(self(self, d - 1), 2)));
      case 9:
        return make_binary(Op::Div, self(self, d - 1),
                           make_binary(Op::Add, make_constant(2), make_unary(Op::Cos, self(self, d - 1))));
      default:
        return make_power(make_unary(Op::Sin, self(self, d - 1)), std::uniform_int_distribution<int>(2, 3)(rng));
    }
  };
  return symbolics::Expression(build(build, depth), dim);
}

DerivativeCheck check_derivatives(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-1, 1);
  DerivativeCheck out;
  for (std::size_t k = 0; k < count; ++k) {
    const int dim = 1 + static_cast<int>(k % 4);
    const auto e = random_expression(rng, dim, 1 + static_cast<int>(k % 5));
    for (int point = 0; point < 10; ++point) {
      Vector x(dim);
      for (int i = 0; i < dim; ++i) x(i) = coord(rng);
      const auto jet = e.jet(x);
      const double h1 = 1e-5, h2 = 1e-4;
      for (int i = 0; i < dim; ++i) {
        Vector xp = x, xm = x;
        xp(i) += h1;
        xm(i) -= h1;
        const double fd = (e.value(xp) - e.value(xm)) / (2 * h1);
        out.max_gradient_error = std::max(out.max_gradient_error,
                                          std::fabs(fd - jet.gradient(i)) / std::max(1.0, std::fabs(jet.gradient(i))));
        for (int j = 0; j < dim; ++j) {
          Vector pp = x, pm = x, mp = x, mm = x;
          pp(i) += h2, pp(j) += h2;
          pm(i) += h2, pm(j) -= h2;
          mp(i) -= h2, mp(j) += h2;
          mm(i) -= h2, mm(j) -= h2;
          const double fd2 = (e.value(pp) - e.value(pm) - e.value(mp) + e.value(mm)) / (4 * h2 * h2);
          out.max_hessian_error = std::max(out.max_hessian_error, std::fabs(fd2 - jet.hessian(i, j)) /
                                                                      std::max(1.0, std::fabs(jet.hessian(i, j))));
        }
      }
      ++out.points;
    }
    ++out.expressions;
  }
  return out;
}

std::vector<CriterionResult> run(const Options& opts) {
  Context ctx(opts.seed);
  std::vector<CriterionResult> results;
  for (const auto& def : kCriteria) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), def.number) == opts.only.end()) continue;
    Criterion c(def.number, def.name, def.budget);
    try {
      def.body(ctx, c);
    } catch (const std::exception& e) {
      c.check(false, std::string("error: ") + e.what());
    }
    results.push_back(c.finish());
    if (opts.on_result) opts.on_result(results.back());
  }
  return results;
}

std::string format(const CriterionResult& r) {
  char head[160];
  std::snprintf(head, sizeof head, "%s %2d  %-40s (%.2f s / %.0f s)", r.pass ? "PASS" : "FAIL", r.number,
                r.name.c_str(), r.seconds, r.budget_seconds);
  std::string out = head;
  for (const auto& d : r.details) out += "\n        " + d;
  return out;
}

}  // namespace morseflow::acceptance
