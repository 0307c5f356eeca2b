#include "morseflow/catalog.hpp"

#include "morseflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace morseflow::catalog {

namespace detail {
extern const std::pair<std::string_view, std::string_view> kEmbeddedScenarios[];
extern const std::size_t kEmbeddedScenarioCount;
}  // namespace detail

namespace {

using config::Document;
using geometry::Vector;
using config::Entry;
using config::Section;

// Keys accepted per section; anything else is reported as unknown.
const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"scenario", {"name", "description"}},
      {"manifold", {"ambient_dim", "box.lo", "box.hi", "constraint_tol", "rank_tol"}},
      {"function", {"f"}},
      {"census", {"starts", "grad_tol", "degenerate_tol", "dedupe_radius", "max_newton_iterations"}},
      {"integrator",
       {"rel_tol", "abs_tol", "t_max", "max_step", "initial_step", "capture_grad_tol", "capture_radius"}},
      {"seeds", {"census", "sampling"}},
      {"expected",
       {"critical_values", "indices", "lambda_min", "euler_characteristic", "edges", "curvature",
        "sectional_curvature"}},
  };
  return keys;
}

bool is_constraint_key(const std::string& key, int& number) {
  constexpr std::string_view prefix = "constraint.";
  if (key.rfind(prefix, 0) != 0 || key.size() == prefix.size()) return false;
  number = 0;
  for (std::size_t i = prefix.size(); i < key.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(key[i])) || key.size() - prefix.size() > 4) return false;
    number = number * 10 + (key[i] - '0');
  }
  return true;
}

symbolics::Expression parse_expression(const Document& doc, const Entry& e, int dim) {
  try {
    return symbolics::parse(e.value, dim);
  } catch (const ParseError& err) {
    doc.fail(e.line, e.column + err.position(), err.what());
  }
}

double positive(const Document& doc, const Entry& e) {
  const double v = config::to_real(doc, e);
  if (!(v > 0) || !std::isfinite(v)) doc.fail(e, "must be a positive finite number");
  return v;
}

std::uint64_t seed_value(const Document& doc, const Entry& e) {
  const long long v = config::to_integer(doc, e);
  if (v < 0) doc.fail(e, "seed must be non-negative");
  return static_cast<std::uint64_t>(v);
}

Expected parse_expected(const Document& doc, const Section& sec) {
  Expected ex;
  auto require = [&](const char* key) -> const Entry& {
    const Entry* e = sec.find(key);
    if (!e) doc.fail(sec.line, 1, std::string("[expected] requires '") + key + "'");
    return *e;
  };
  const Entry& values = require("critical_values");
  ex.critical_values = config::to_reals(doc, values);
  const Entry& indices = require("indices");
  for (long long i : config::to_integers(doc, indices)) {
    if (i < 0) doc.fail(indices, "indices must be non-negative");
    ex.indices.push_back(static_cast<int>(i));
  }
  if (ex.indices.size() != ex.critical_values.size())
    doc.fail(indices, "needs one index per critical value");
  if (!std::is_sorted(ex.critical_values.begin(), ex.critical_values.end()))
    doc.fail(values, "critical values must be listed in ascending order");

  const Entry& euler = require("euler_characteristic");
  ex.euler_characteristic = static_cast<int>(config::to_integer(doc, euler));
  int parity_sum = 0;
  for (int i : ex.indices) parity_sum += (i % 2 == 0) ? 1 : -1;
  if (parity_sum != ex.euler_characteristic)
    doc.fail(euler, "index parity sum over the critical points is " + std::to_string(parity_sum));

  if (const Entry* e = sec.find("lambda_min")) {
    ex.lambda_min = config::to_reals(doc, *e);
    const auto minima = static_cast<std::size_t>(std::count(ex.indices.begin(), ex.indices.end(), 0));
    if (ex.lambda_min.size() != minima) doc.fail(*e, "needs one value per minimum");
  }
  if (const Entry* e = sec.find("edges")) {
    std::istringstream in(e->value);
    std::string tok;
    const int count = static_cast<int>(ex.indices.size());
    while (in >> tok) {
      const auto gt = tok.find('>');
      int from = -1, to = -1;
      try {
        if (gt == std::string::npos) throw std::invalid_argument(tok);
        std::size_t used = 0;
        from = std::stoi(tok.substr(0, gt), &used);
        if (used != gt) throw std::invalid_argument(tok);
        to = std::stoi(tok.substr(gt + 1), &used);
        if (used != tok.size() - gt - 1) throw std::invalid_argument(tok);
      } catch (const std::logic_error&) {
        doc.fail(*e, "edges are written from>to, got '" + tok + "'");
      }
      if (from < 0 || to < 0 || from >= count || to >= count) doc.fail(*e, "edge '" + tok + "' names an unknown id");
      ex.edges.emplace_back(from, to);
    }
  }
  if (const Entry* e = sec.find("curvature")) {
    if (e->value == "flat") {
      ex.curvature = CurvatureClass::Flat;
    } else if (e->value == "constant-positive") {
      ex.curvature = CurvatureClass::ConstantPositive;
      const Entry& k = require("sectional_curvature");
      ex.sectional_curvature = positive(doc, k);
    } else {
      doc.fail(*e, "curvature must be flat or constant-positive");
    }
  }
  return ex;
}

}  // namespace

std::string to_string(CurvatureClass c) {
  switch (c) {
    case CurvatureClass::Flat:
      return "flat";
    case CurvatureClass::ConstantPositive:
      return "constant-positive";
    case CurvatureClass::Unspecified:
      break;
  }
  return "unspecified";
}

Scenario parse_scenario(std::string_view text, std::string source) {
  const Document doc = Document::parse(text, source);
  for (const Section& sec : doc.sections()) {
    auto it = known_keys().find(sec.name);
    if (it == known_keys().end()) doc.fail(sec.line, 1, "unknown section [" + sec.name + "]");
    for (const Entry& e : sec.entries) {
      int number = 0;
      if (it->second.count(e.key)) continue;
      if (sec.name == "manifold" && is_constraint_key(e.key, number)) continue;
      doc.fail(e.line, e.column, "unknown key '" + e.key + "' in [" + sec.name + "]");
    }
  }
  auto section = [&](const char* name) -> const Section& {
    const Section* s = doc.find(name);
    if (!s) doc.fail(1, 1, std::string("missing section [") + name + "]");
    return *s;
  };

  const Section& sc = section("scenario");
  const Entry* name = sc.find("name");
  if (!name) doc.fail(sc.line, 1, "[scenario] requires 'name'");
  const Section& man = section("manifold");
  const Entry* dim_entry = man.find("ambient_dim");
  if (!dim_entry) doc.fail(man.line, 1, "[manifold] requires 'ambient_dim'");
  const long long dim = config::to_integer(doc, *dim_entry);
  if (dim < 1 || dim > 64) doc.fail(*dim_entry, "ambient_dim must lie in [1, 64]");
  const int n = static_cast<int>(dim);

  std::map<int, const Entry*> numbered;
  for (const Entry& e : man.entries) {
    int number = 0;
    if (is_constraint_key(e.key, number)) numbered[number] = &e;
  }
  if (numbered.empty()) doc.fail(man.line, 1, "[manifold] needs at least one constraint.<k> line");
  int expect = 1;
  for (const auto& [k, e] : numbered)
    if (k != expect++) doc.fail(*e, "constraints must be numbered 1, 2, ... without gaps");
  std::vector<symbolics::Expression> constraints;
  std::vector<std::string> constraint_text;
  for (const auto& [k, e] : numbered) {
    constraints.push_back(parse_expression(doc, *e, n));
    constraint_text.push_back(e->value);
  }
  if (static_cast<int>(constraints.size()) >= n) doc.fail(man.line, 1, "need fewer constraints than ambient_dim");

  geometry::Box box;
  const Entry* lo = man.find("box.lo");
  const Entry* hi = man.find("box.hi");
  if (!lo || !hi) doc.fail(man.line, 1, "[manifold] needs box.lo and box.hi (the sampling box)");
  {
    const std::vector<double> l = config::to_reals(doc, *lo), h = config::to_reals(doc, *hi);
    if (static_cast<int>(l.size()) != n) doc.fail(*lo, "needs ambient_dim entries");
    if (static_cast<int>(h.size()) != n) doc.fail(*hi, "needs ambient_dim entries");
    box.lo = Eigen::Map<const Vector>(l.data(), n);
    box.hi = Eigen::Map<const Vector>(h.data(), n);
    if (!(box.lo.array() < box.hi.array()).all()) doc.fail(*hi, "box.hi must exceed box.lo componentwise");
  }
  double constraint_tol = geometry::ImplicitManifold::kDefaultConstraintTol;
  double rank_tol = geometry::ImplicitManifold::kDefaultRankTol;
  if (const Entry* e = man.find("constraint_tol")) constraint_tol = positive(doc, *e);
  if (const Entry* e = man.find("rank_tol")) rank_tol = positive(doc, *e);

  const Section& fn = section("function");
  const Entry* f = fn.find("f");
  if (!f) doc.fail(fn.line, 1, "[function] requires 'f'");

  Scenario s{name->value,
             sc.find("description") ? sc.find("description")->value : std::string(),
             doc.source(),
             std::move(constraint_text),
             f->value,
             geometry::ImplicitManifold(n, std::move(constraints), std::move(box), constraint_tol, rank_tol),
             parse_expression(doc, *f, n),
             64,
             {},
             {},
             {},
             std::nullopt};

  if (const Section* c = doc.find("census")) {
    if (const Entry* e = c->find("starts")) {
      const long long v = config::to_integer(doc, *e);
      if (v < 1 || v > 1000000) doc.fail(*e, "starts must lie in [1, 1000000]");
      s.census_starts = static_cast<int>(v);
    }
    if (const Entry* e = c->find("grad_tol")) s.census.grad_tol = positive(doc, *e);
    if (const Entry* e = c->find("degenerate_tol")) s.census.degenerate_tol = positive(doc, *e);
    if (const Entry* e = c->find("dedupe_radius")) s.census.dedupe_radius = positive(doc, *e);
    if (const Entry* e = c->find("max_newton_iterations")) {
      const long long v = config::to_integer(doc, *e);
      if (v < 1 || v > 10000) doc.fail(*e, "max_newton_iterations must lie in [1, 10000]");
      s.census.max_newton_iterations = static_cast<int>(v);
    }
  }
  if (const Section* c = doc.find("integrator")) {
    flow::FlowConfig& cfg = s.integrator;
    const std::pair<const char*, double*> fields[] = {
        {"rel_tol", &cfg.rel_tol},         {"abs_tol", &cfg.abs_tol},
        {"t_max", &cfg.t_max},             {"max_step", &cfg.max_step},
        {"initial_step", &cfg.initial_step}, {"capture_grad_tol", &cfg.capture_grad_tol},
        {"capture_radius", &cfg.capture_radius}};
    for (const auto& [key, dst] : fields)
      if (const Entry* e = c->find(key)) *dst = positive(doc, *e);
  }
  if (const Section* c = doc.find("seeds")) {
    if (const Entry* e = c->find("census")) s.seeds.census = seed_value(doc, *e);
    if (const Entry* e = c->find("sampling")) s.seeds.sampling = seed_value(doc, *e);
  }
  if (const Section* c = doc.find("expected")) s.expected = parse_expected(doc, *c);
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), path);
}

std::vector<std::string> list_scenarios() {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < detail::kEmbeddedScenarioCount; ++i)
    names.emplace_back(detail::kEmbeddedScenarios[i].first);
  std::sort(names.begin(), names.end());
  return names;
}

std::string_view scenario_text(std::string_view name) {
  for (std::size_t i = 0; i < detail::kEmbeddedScenarioCount; ++i)
    if (detail::kEmbeddedScenarios[i].first == name) return detail::kEmbeddedScenarios[i].second;
  std::string msg = "unknown scenario '" + std::string(name) + "'; available:";
  for (const auto& n : list_scenarios()) msg += " " + n;
  msg += " sphereM:<m>";
  throw ConfigError(msg);
}

std::string sphere_m_text(int m) {
  if (m < 1 || m > 30) throw ConfigError("sphereM: m must lie in [1, 30]");
  const int n = m + 1;
  auto join = [&](const char* term, const char* sep) {
    std::string out;
    for (int i = 1; i <= n; ++i) {
      if (i > 1) out += sep;
      out += std::string("x") + std::to_string(i) + term;
    }
    return out;
  };
  std::string lo, hi;
  for (int i = 0; i < n; ++i) {
    lo += (i ? " " : "") + std::string("-1.5");
    hi += (i ? " " : "") + std::string("1.5");
  }
  std::ostringstream o;
  o << "# Unit " << m << "-sphere in R^" << n << " with a linear height function.\n"
    << "[scenario]\n"
    << "name = " << (m == 4 ? std::string("sphereM") : "sphereM:" + std::to_string(m)) << "\n"
    << "description = unit " << m << "-sphere, f = a.x with a = (1,...,1)/sqrt(" << n << ")\n\n"
    << "[manifold]\n"
    << "ambient_dim = " << n << "\n"
    << "constraint.1 = " << join("^2", " + ") << " - 1\n"
    << "box.lo = " << lo << "\n"
    << "box.hi = " << hi << "\n\n"
    << "[function]\n"
    << "f = (" << join("", " + ") << ") / sqrt(" << n << ")\n\n"
    << "[census]\n"
    << "starts = 64\n\n"
    << "[seeds]\n"
    << "census = 0\n"
    << "sampling = 0\n\n"
    << "[expected]\n"
    << "critical_values = -1 1\n"
    << "indices = 0 " << m << "\n"
    << "lambda_min = 1\n"
    << "euler_characteristic = " << (m % 2 == 0 ? 2 : 0) << "\n"
    << "edges = 1>0\n"
    << "curvature = constant-positive\n"
    << "sectional_curvature = 1\n";
  return o.str();
}

Scenario load_scenario(std::string_view name) {
  constexpr std::string_view prefix = "sphereM:";
  if (name.rfind(prefix, 0) == 0) {
    const std::string digits(name.substr(prefix.size()));
    if (digits.empty() || digits.size() > 2 || !std::all_of(digits.begin(), digits.end(), ::isdigit))
      throw ConfigError("sphereM:<m> needs an integer m in [1, 30], got '" + std::string(name) + "'");
    return parse_scenario(sphere_m_text(std::stoi(digits)), std::string(name));
  }
  return parse_scenario(scenario_text(name), std::string(name));
}

Scenario resolve_scenario(std::string_view spec) {
  const std::string s(spec);
  const bool pathlike = s.find('/') != std::string::npos || (s.size() > 4 && s.compare(s.size() - 4, 4, ".scn") == 0);
  if (!pathlike) {
    const auto names = list_scenarios();
    if (std::find(names.begin(), names.end(), s) != names.end() || s.rfind("sphereM:", 0) == 0)
      return load_scenario(spec);
    if (!std::ifstream(s).good()) return load_scenario(spec);
  }
  return load_scenario_file(s);
}

}  // namespace morseflow::catalog
