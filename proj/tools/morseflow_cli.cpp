// morseflow: command-line front end over the catalog and the analysis
// modules. Exit status: 0 success, 1 failed check, 2 configuration or
// usage error. Reports go to --out (default $MORSEFLOW_OUT_DIR, else ".").

#include "morseflow/acceptance.hpp"
#include "morseflow/catalog.hpp"
#include "morseflow/connectivity.hpp"
#include "morseflow/linearization.hpp"
#include "morseflow/report.hpp"
#include "morseflow/transport.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace mf = morseflow;
using mf::geometry::Matrix;
using mf::geometry::Vector;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;

struct Common {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::optional<double> grad_tol, rel_tol, abs_tol, t_max, max_step, capture_radius, capture_grad_tol;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--scenario,-s", c.scenario, "Catalog name (see 'list') or scenario file path")->required();
  sub->add_option("--seed", c.seed, "Global seed, added to the scenario seeds")->capture_default_str();
  sub->add_option("--out,-o", c.out, "Output directory")->envname("MORSEFLOW_OUT_DIR")->capture_default_str();
  sub->add_option("--grad-tol", c.grad_tol, "Critical-point gradient tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--rel-tol", c.rel_tol, "Integrator relative tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--abs-tol", c.abs_tol, "Integrator absolute tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--t-max", c.t_max, "Integration time limit")->check(CLI::PositiveNumber);
  sub->add_option("--max-step", c.max_step, "Largest integration step")->check(CLI::PositiveNumber);
  sub->add_option("--capture-radius", c.capture_radius, "Capture ball radius")->check(CLI::PositiveNumber);
  sub->add_option("--capture-grad-tol", c.capture_grad_tol, "Capture gradient tolerance")->check(CLI::PositiveNumber);
}

struct Session {
  mf::catalog::Scenario scenario;
  mf::morse::Census census;
  std::uint64_t seed = 0;
  std::filesystem::path out;

  const mf::geometry::ImplicitManifold& m() const { return scenario.manifold; }
  const mf::symbolics::Expression& f() const { return scenario.function; }
  const std::vector<mf::morse::CriticalPoint>& crits() const { return census.points; }

  void write(const std::string& file, const std::string& content) const {
    mf::report::write_file_atomic((out / file).string(), content);
    std::cout << "wrote " << (out / file).string() << "\n";
  }
};

Session open_session(const Common& c) {
  mf::catalog::Scenario s = mf::catalog::resolve_scenario(c.scenario);
  if (c.grad_tol) s.census.grad_tol = *c.grad_tol;
  if (c.rel_tol) s.integrator.rel_tol = *c.rel_tol;
  if (c.abs_tol) s.integrator.abs_tol = *c.abs_tol;
  if (c.t_max) s.integrator.t_max = *c.t_max;
  if (c.max_step) s.integrator.max_step = *c.max_step;
  if (c.capture_radius) s.integrator.capture_radius = *c.capture_radius;
  if (c.capture_grad_tol) s.integrator.capture_grad_tol = *c.capture_grad_tol;
  std::error_code ec;
  std::filesystem::create_directories(c.out, ec);
  if (!std::filesystem::is_directory(c.out)) throw mf::ConfigError("cannot create output directory '" + c.out + "'");
  Session sess{std::move(s), {}, c.seed, c.out};
  sess.census = mf::morse::find_critical_points(sess.m(), sess.f(), sess.scenario.census_starts,
                                                sess.scenario.seeds.census + c.seed, sess.scenario.census);
  return sess;
}

std::optional<mf::morse::GeometricConstants> constants(const Session& s, std::string& error) {
  try {
    return mf::morse::geometric_constants(s.m(), s.f(), s.crits(), 2000, s.scenario.seeds.sampling + s.seed);
  } catch (const mf::PreconditionError& e) {
    error = e.what();
    return std::nullopt;
  }
}

Vector parse_point(const std::string& text, int n, const char* what) {
  std::vector<double> v;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw mf::ConfigError(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  if (static_cast<int>(v.size()) != n)
    throw mf::ConfigError(std::string(what) + ": expected " + std::to_string(n) + " comma-separated coordinates");
  return Eigen::Map<Vector>(v.data(), n);
}

// A point on M from user coordinates: accepted if it retracts from within
// 1e-3 of the manifold.
Vector on_manifold(const Session& s, const Vector& x, const char* what) {
  Vector y;
  try {
    y = mf::geometry::retract(s.m(), x);
  } catch (const mf::Error&) {
    throw mf::ConfigError(std::string(what) + " is too far from the manifold to retract");
  }
  if ((y - x).norm() > 1e-3) throw mf::ConfigError(std::string(what) + " is not on the manifold (distance > 1e-3)");
  return y;
}

int cmd_critical_points(const Common& c) {
  Session s = open_session(c);
  std::string error;
  const auto k = constants(s, error);
  s.write("critical_points.json", mf::report::critical_points_json({&s.scenario, c.seed, &s.census, k, error}));
  for (const auto& p : s.crits())
    std::printf("  %d  index %d  value %.12g%s\n", p.id, p.index, p.value, p.degenerate ? "  (degenerate)" : "");
  std::printf("euler characteristic %d, %s\n", mf::morse::euler_characteristic(s.crits()),
              mf::morse::is_morse(s.crits()) ? "Morse" : "not Morse");
  return 0;
}

int cmd_flow(const Common& c, const std::string& from, bool backward) {
  Session s = open_session(c);
  const auto dir = backward ? mf::flow::Direction::Backward : mf::flow::Direction::Forward;
  Vector x0;
  if (from.find(',') == std::string::npos && !from.empty() &&
      from.find_first_not_of("0123456789") == std::string::npos) {
    const int id = std::stoi(from);
    if (id < 0 || id >= static_cast<int>(s.crits().size()))
      throw mf::ConfigError("--from: no critical point with id " + from);
    const auto& p = s.crits()[static_cast<std::size_t>(id)];
    // Leave along the first unstable (forward) or stable (backward) direction.
    Eigen::Index k = -1;
    for (Eigen::Index j = 0; j < p.eigenvalues.size() && k < 0; ++j)
      if (backward ? p.eigenvalues(j) > 0 : p.eigenvalues(j) < 0) k = j;
    if (k < 0)
      throw mf::ConfigError("--from " + from + ": critical point has no " +
                            (backward ? "stable" : "unstable") + " direction to leave along");
    x0 = mf::geometry::retract(s.m(), p.location + 1e-4 * p.eigenvectors.col(k));
  } else {
    x0 = on_manifold(s, parse_point(from, s.m().ambient_dim(), "--from"), "--from point");
  }
  const auto traj = mf::flow::integrate_flow(s.m(), s.f(), x0, s.scenario.integrator, s.crits(), dir);
  std::string error;
  const auto k = constants(s, error);
  std::optional<mf::flow::LengthBoundReport> lb;
  if (k && dir == mf::flow::Direction::Forward) lb = mf::flow::check_length_bound(traj, s.crits(), *k, 1.05);
  s.write("trajectory.csv", mf::report::trajectory_csv(traj));
  s.write("terminal.json", mf::report::terminal_json({&s.scenario, &traj, lb, 1.05}));
  std::printf("terminal %s, limit %d, t = %.6g, %zu samples\n", mf::flow::to_string(traj.terminal).c_str(),
              traj.limit_id, traj.samples.back().t, traj.samples.size());
  if (traj.terminal == mf::flow::Terminal::Stalled)
    std::cerr << "warning: flow stalled at an unregistered critical point; raise [census] starts\n";
  if (lb && !lb->pass) {
    std::cerr << "length bound violated\n";
    return kExitCheckFailed;
  }
  return 0;
}

int cmd_graph(const Common& c) {
  Session s = open_session(c);
  const auto g = mf::connectivity::build_connection_graph(s.m(), s.f(), s.crits(), s.scenario.integrator);
  const auto conn = mf::connectivity::check_connected(g);
  const mf::report::GraphReport r{&s.scenario, &s.crits(), &g, conn};
  s.write("graph.json", mf::report::graph_json(r));
  s.write("graph.dot", mf::report::graph_dot(r));
  for (const auto& e : g.edges) std::printf("  %d -> %d  (%zu orbits)\n", e.from, e.to, e.witnesses.size());
  std::printf("connected: %s\n", conn.connected ? "true" : "false");
  if (!conn.connected)
    std::cerr << "diagnostic: the single-hop orbit graph is disconnected (" << conn.components.size()
              << " components)\n";
  return 0;
}

int cmd_decay(const Common& c, const std::string& from, const std::string& v) {
  Session s = open_session(c);
  const std::uint64_t seed = s.scenario.seeds.sampling + c.seed;
  const Vector x0 = from.empty() ? mf::geometry::sample_points(s.m(), 1, seed).front()
                                 : on_manifold(s, parse_point(from, s.m().ambient_dim(), "--from"), "--from point");
  Vector v0;
  if (v.empty()) {
    v0 = mf::transport::random_tangent_plane(s.m(), x0, seed).first;
  } else {
    v0 = mf::geometry::tangent_projector(s.m(), x0) * parse_point(v, s.m().ambient_dim(), "--v");
    if (v0.norm() < 1e-12) throw mf::ConfigError("--v has no component tangent to the manifold at the start point");
  }
  const auto series = mf::linearization::integrate_variational(s.m(), s.f(), x0, Matrix(v0), s.scenario.integrator,
                                                               s.crits());
  mf::report::DecayRun run{&s.scenario, c.seed, x0, v0, &series, {}, std::nullopt, {}};
  if (series.samples.size() >= 3) run.energy = mf::linearization::check_energy_ode(series, s.m(), s.f(), 0);
  try {
    run.decay = mf::linearization::fit_decay_rate(series, s.crits(), 0);
  } catch (const mf::PreconditionError& e) {
    run.decay_error = e.what();
  }
  s.write("decay.json", mf::report::decay_json(run));
  if (!run.decay) {
    std::cerr << "decay fit unavailable: " << run.decay_error << "\n";
    return kExitCheckFailed;
  }
  std::printf("c_fit %.6g, c_pred %.6g, relative gap %.3g\n", run.decay->c_fit, run.decay->c_pred,
              run.decay->relative_gap);
  return 0;
}

int cmd_basin(const Common& c, std::size_t samples) {
  Session s = open_session(c);
  const auto rep = mf::connectivity::basin_sample(s.m(), s.f(), s.crits(), s.scenario.integrator, samples,
                                                  s.scenario.seeds.sampling + c.seed);
  s.write("basin.json", mf::report::basin_json({&s.scenario, c.seed, &s.crits(), rep}));
  std::printf("minima fraction %.6g over %zu samples (%zu unresolved)\n", rep.minima_fraction, rep.n_samples,
              rep.unresolved);
  return 0;
}

int cmd_curvature(const Common& c, std::size_t samples) {
  Session s = open_session(c);
  if (s.m().dim() < 2) throw mf::ConfigError("curvature needs a manifold of dimension at least 2");
  mf::transport::InvarianceOptions opts;
  opts.flow = s.scenario.integrator;
  const std::uint64_t seed = s.scenario.seeds.sampling + c.seed;
  mf::report::FlatnessRun run{&s.scenario, c.seed, {}, {}};
  try {
    run.verdict = mf::transport::flatness_test(s.m(), s.f(), s.crits(), samples, seed, opts);
  } catch (const mf::PreconditionError& e) {
    throw mf::ConfigError(e.what());
  }
  for (std::size_t i = 0; i < run.verdict.samples.size(); ++i) {
    const auto [u, v] = mf::transport::random_tangent_plane(s.m(), run.verdict.samples[i].x, seed * 7919 + i);
    run.sectional.push_back(mf::transport::holonomy_curvature(s.m(), run.verdict.samples[i].x, u, v).sectional);
  }
  s.write("flatness.json", mf::report::flatness_json(run));
  std::printf("curvature max %.6g, lie derivative max %.6g, consistent %s\n", run.verdict.curvature_max,
              run.verdict.lie_derivative_max, run.verdict.consistent ? "true" : "false");
  return run.verdict.consistent ? 0 : kExitCheckFailed;
}

int cmd_check(std::uint64_t seed, const std::vector<int>& only) {
  mf::acceptance::Options opts;
  opts.seed = seed;
  opts.only = only;
  opts.on_result = [](const mf::acceptance::CriterionResult& r) {
    std::printf("%s\n", mf::acceptance::format(r).c_str());
    std::fflush(stdout);
  };
  const auto results = mf::acceptance::run(opts);
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  return failed == 0 && !results.empty() ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morse-theoretic gradient flow analysis on implicit manifolds"};
  app.require_subcommand(1);

  Common common;
  std::string from, vec;
  bool backward = false;
  std::size_t samples = 2000, curvature_samples = 20;
  std::uint64_t check_seed = 0;
  std::vector<int> only;

  auto* list = app.add_subcommand("list", "List the built-in scenarios");
  auto* crit = app.add_subcommand("critical-points", "Critical points, Hessians and geometric constants");
  add_common(crit, common);
  auto* flow = app.add_subcommand("flow", "Integrate one gradient flow line");
  add_common(flow, common);
  flow->add_option("--from", from, "Start point x1,...,xn or a critical point id")->required();
  flow->add_flag("--backward", backward, "Integrate the positive gradient flow");
  auto* graph = app.add_subcommand("graph", "Orbit connection graph between critical points");
  add_common(graph, common);
  auto* decay = app.add_subcommand("decay", "Variational flow, energy identity and decay-rate fit");
  add_common(decay, common);
  decay->add_option("--v", vec, "Initial vector v1,...,vn (projected to the tangent space)");
  decay->add_option("--from", from, "Start point x1,...,xn (default: sampled)");
  auto* basin = app.add_subcommand("basin", "Monte Carlo basin tally");
  add_common(basin, common);
  basin->add_option("--samples,-n", samples, "Number of start points")->check(CLI::PositiveNumber)->capture_default_str();
  auto* curv = app.add_subcommand("curvature", "Holonomy curvature and flatness test");
  add_common(curv, common);
  curv->add_option("--samples,-n", curvature_samples, "Number of sample points")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* check = app.add_subcommand("check", "Run the acceptance suite on the catalog");
  check->add_option("--seed", check_seed, "Global seed")->capture_default_str();
  check->add_option("--only", only, "Criterion numbers to run")->check(CLI::Range(1, mf::acceptance::kCriterionCount));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*list) {
      for (const auto& n : mf::catalog::list_scenarios()) std::printf("%s\n", n.c_str());
      std::printf("sphereM:<m>\n");
      return 0;
    }
    if (*crit) return cmd_critical_points(common);
    if (*flow) return cmd_flow(common, from, backward);
    if (*graph) return cmd_graph(common);
    if (*decay) return cmd_decay(common, from, vec);
    if (*basin) return cmd_basin(common, samples);
    if (*curv) return cmd_curvature(common, curvature_samples);
    if (*check) return cmd_check(check_seed, only);
  } catch (const mf::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const mf::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const mf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitConfig;
}
