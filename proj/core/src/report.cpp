#include "morseflow/report.hpp"

#include "morseflow/linalg.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <system_error>
#include <unistd.h>

namespace morseflow::report {

namespace {

using Json = nlohmann::ordered_json;

void emit(const Json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        emit(it.value(), out, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += pad;
        emit(e, out, depth + 1);
      }
      out += flat ? "]" : "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? linalg::format_real(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

std::string serialize(const Json& j) {
  std::string out;
  emit(j, out, 0);
  out += "\n";
  return out;
}

Json vec(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json header(const char* schema, const catalog::Scenario& s) {
  Json j;
  j["schema"] = std::string("morseflow/") + schema;
  j["version"] = kSchemaVersion;
  j["scenario"] = s.name;
  return j;
}

Json stats_json(const flow::TrajectoryStats& s) {
  Json j;
  j["steps"] = s.steps;
  j["rejected"] = s.rejected;
  j["retraction_halvings"] = s.retraction_halvings;
  j["monotonicity_violations"] = s.monotonicity_violations;
  j["max_constraint_drift"] = s.max_constraint_drift;
  return j;
}

Json limit_json(int id) { return id >= 0 ? Json(id) : Json(nullptr); }

}  // namespace

std::string critical_points_json(const CensusReport& r) {
  Json j = header("critical_points", *r.scenario);
  j["seed"] = r.seed;
  j["census"] = {{"starts", r.census->starts}, {"converged", r.census->converged}, {"discarded", r.census->discarded}};
  j["euler_characteristic"] = morse::euler_characteristic(r.census->points);
  j["is_morse"] = morse::is_morse(r.census->points);
  if (r.constants) {
    j["geometric_constants"] = {
        {"r", r.constants->r}, {"c_floor", r.constants->c_floor}, {"samples_outside", r.constants->samples_outside}};
  } else {
    j["geometric_constants"] = nullptr;
    j["geometric_constants_error"] = r.constants_error;
  }
  Json pts = Json::array();
  for (const auto& p : r.census->points) {
    Json q;
    q["id"] = p.id;
    q["location"] = vec(p.location);
    q["value"] = p.value;
    q["index"] = p.index;
    q["eigenvalues"] = vec(p.eigenvalues);
    q["nondegeneracy_margin"] = p.nondegeneracy_margin;
    q["gradient_norm"] = p.gradient_norm;
    q["degenerate"] = p.degenerate;
    pts.push_back(std::move(q));
  }
  j["critical_points"] = std::move(pts);
  return serialize(j);
}

std::string terminal_json(const FlowReport& r) {
  const flow::Trajectory& t = *r.trajectory;
  Json j = header("terminal", *r.scenario);
  j["direction"] = t.direction == flow::Direction::Forward ? "forward" : "backward";
  j["start"] = vec(t.samples.front().x);
  j["end"] = vec(t.samples.back().x);
  j["terminal"] = flow::to_string(t.terminal);
  j["limit_id"] = limit_json(t.limit_id);
  j["t_final"] = t.samples.back().t;
  j["samples"] = t.samples.size();
  j["f_start"] = t.samples.front().f;
  j["f_end"] = t.samples.back().f;
  j["stats"] = stats_json(t.stats);
  if (r.length_bound) {
    Json lb;
    lb["lhs"] = r.length_bound->lhs;
    lb["rhs"] = r.length_bound->rhs;
    lb["slack"] = r.slack;
    lb["pass"] = r.length_bound->pass;
    Json segs = Json::array();
    for (const auto& s : r.length_bound->segments)
      segs.push_back({{"first", s.first}, {"last", s.last}, {"length", s.length}, {"drop", s.drop},
                      {"bound", s.bound}, {"pass", s.pass}});
    lb["segments"] = std::move(segs);
    j["length_bound"] = std::move(lb);
  } else {
    j["length_bound"] = nullptr;
  }
  return serialize(j);
}

std::string trajectory_csv(const flow::Trajectory& traj) {
  std::string out = "t";
  const Eigen::Index n = traj.samples.empty() ? 0 : traj.samples.front().x.size();
  for (Eigen::Index i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
  out += ",f,grad_norm\n";
  for (const auto& s : traj.samples) {
    out += linalg::format_real(s.t);
    for (Eigen::Index i = 0; i < n; ++i) out += "," + linalg::format_real(s.x(i));
    out += "," + linalg::format_real(s.f) + "," + linalg::format_real(s.grad_norm) + "\n";
  }
  return out;
}

std::string graph_json(const GraphReport& r) {
  Json j = header("graph", *r.scenario);
  Json nodes = Json::array();
  for (const auto& p : *r.crits) nodes.push_back({{"id", p.id}, {"index", p.index}, {"value", p.value}});
  j["nodes"] = std::move(nodes);
  Json edges = Json::array();
  for (const auto& e : r.graph->edges) {
    Json w = Json::array();
    for (const auto& wit : e.witnesses) {
      const flow::Trajectory& t = r.graph->trajectories[wit.trajectory];
      w.push_back({{"eigendirection", wit.eigendirection}, {"sign", wit.sign}, {"t_final", t.samples.back().t}});
    }
    edges.push_back({{"from", e.from}, {"to", e.to}, {"witnesses", std::move(w)}});
  }
  j["edges"] = std::move(edges);
  j["connected"] = r.connectedness.connected;
  j["components"] = r.connectedness.components;
  return serialize(j);
}

std::string graph_dot(const GraphReport& r) {
  std::string out = "digraph morseflow {\n  node [shape=circle];\n";
  for (const auto& p : *r.crits)
    out += "  " + std::to_string(p.id) + " [label=\"" + std::to_string(p.id) + ":" + std::to_string(p.index) + ":" +
           linalg::format_real(p.value) + "\"];\n";
  for (const auto& e : r.graph->edges) out += "  " + std::to_string(e.from) + " -> " + std::to_string(e.to) + ";\n";
  out += "}\n";
  return out;
}

std::string decay_json(const DecayRun& r) {
  Json j = header("decay", *r.scenario);
  j["seed"] = r.seed;
  j["x0"] = vec(r.x0);
  j["v0"] = vec(r.v0);
  j["terminal"] = flow::to_string(r.series->terminal);
  j["limit_id"] = limit_json(r.series->limit_id);
  j["t_final"] = r.series->samples.back().t;
  j["max_tangency_drift"] = r.series->max_tangency_drift;
  j["energy"] = {{"max_relative_residual", r.energy.max_relative_residual},
                 {"samples_checked", r.energy.samples_checked}};
  if (r.decay) {
    j["c_fit"] = r.decay->c_fit;
    j["c_pred"] = r.decay->c_pred;
    j["relative_gap"] = r.decay->relative_gap;
    j["fit_window"] = r.decay->fit_window;
    j["fit_residual"] = r.decay->residual;
    j["fit_samples"] = r.decay->fit_samples;
  } else {
    j["c_fit"] = nullptr;
    j["decay_error"] = r.decay_error;
  }
  return serialize(j);
}

std::string basin_json(const BasinRun& r) {
  Json j = header("basin", *r.scenario);
  j["seed"] = r.seed;
  j["n_samples"] = r.basin.n_samples;
  Json tally = Json::array();
  for (const auto& [id, count] : r.basin.tally)
    tally.push_back({{"id", id}, {"index", (*r.crits)[static_cast<std::size_t>(id)].index}, {"count", count}});
  j["tally"] = std::move(tally);
  j["minima_fraction"] = r.basin.minima_fraction;
  j["unresolved"] = r.basin.unresolved;
  return serialize(j);
}

std::string flatness_json(const FlatnessRun& r) {
  Json j = header("flatness", *r.scenario);
  j["seed"] = r.seed;
  j["curvature_class"] =
      r.scenario->expected ? catalog::to_string(r.scenario->expected->curvature) : std::string("unspecified");
  j["floor"] = r.verdict.floor;
  j["curvature_max"] = r.verdict.curvature_max;
  j["lie_derivative_max"] = r.verdict.lie_derivative_max;
  j["consistent"] = r.verdict.consistent;
  Json samples = Json::array();
  for (std::size_t i = 0; i < r.verdict.samples.size(); ++i) {
    const auto& s = r.verdict.samples[i];
    samples.push_back({{"x", vec(s.x)},
                       {"curvature_norm", s.curvature_norm},
                       {"sectional", i < r.sectional.size() ? Json(r.sectional[i]) : Json(nullptr)},
                       {"lie_derivative_norm", s.lie_derivative_norm}});
  }
  j["samples"] = std::move(samples);
  return serialize(j);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw ConfigError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ConfigError("cannot move output into place at '" + path + "'");
  }
}

}  // namespace morseflow::report
