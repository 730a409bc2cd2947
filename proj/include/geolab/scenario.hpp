#pragma once

// JSON scenarios: parsing with schema checks, named presets, and a runner that
// writes CSV/JSON artifacts for each task.

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "geolab/cones.hpp"
#include "geolab/convexity.hpp"
#include "geolab/errors.hpp"
#include "geolab/fields.hpp"
#include "geolab/geodesics.hpp"
#include "geolab/splitting.hpp"

namespace geolab::scenario {

using json = nlohmann::json;

inline constexpr std::string_view tool_version = "1.0.0";
inline constexpr int schema_version = 1;

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> t{"connect", "convexify", "cone", "splitting", "curvature", "degree"};
  return t;
}

/// Defaults per task; a key is accepted only if it appears here, with the same JSON type.
inline const json& option_defaults(const std::string& task) {
  static const std::map<std::string, json> table{
      {"connect",
       {{"pairs", 10}, {"box", 3.0}, {"tol", 1e-10}, {"residual_tol", 1e-6}, {"restarts", 32}, {"nodes", 1001}}},
      {"convexify",
       {{"levels", 40}, {"samples", 64}, {"span", 4.0}, {"probes", 1000}, {"fixed_h", false}, {"rho_nodes", 2001}}},
      {"cone",
       {{"body", "graph"}, {"radius", 20.0}, {"per_axis", 21}, {"normals", 21}, {"extent", 3.0}, {"geodesics", 100}}},
      {"splitting",
       {{"chart", "level"},
        {"scan", false},
        {"trajectories", 13},
        {"x_lo", -3.0},
        {"x_hi", 3.0},
        {"tau_lo", -6.0},
        {"tau_hi", 6.0},
        {"tau_nodes", 241},
        {"grid_x", 25},
        {"grid_tau", 49},
        {"tol", 1e-10}}},
      {"curvature", {{"samples", 10000}, {"box", 3.0}}},
      {"degree", {{"offset", 0.2}, {"directions", 256}}},
  };
  return table.at(task);
}

struct FieldSpec {
  std::string name = "hyperboloid";
  int dim = 2;
  double c = 0.5;                  // paraboloid coefficient
  std::string sigma = "softexp";   // warbled
  std::vector<double> coeffs;      // linear
  double offset = 0.0;             // linear
};

struct Scenario {
  std::string name;
  FieldSpec field;
  std::string task;
  std::uint64_t seed = 0;
  json options;  // defaults merged with the given values
  std::string out_dir = ".";
};

// ---------------------------------------------------------------------------
// Presets

struct Preset {
  std::string name;
  std::string summary;
  json config;
};

inline const std::vector<Preset>& presets() {
  static const std::vector<Preset> p{
      {"hyperboloid", "connect random pairs on the hyperboloid graph",
       {{"name", "hyperboloid"}, {"field", "hyperboloid"}, {"task", "connect"}, {"options", {{"pairs", 20}}}}},
      {"hyperboloid-cone", "recession/normal cones of the hyperboloid graph, v0 and its height function",
       {{"name", "hyperboloid-cone"}, {"field", "hyperboloid"}, {"task", "cone"}}},
      {"rn-counterexample", "cones of the body x t >= 1 in E^2_1; expects no v0 and a certificate",
       {{"name", "rn-counterexample"}, {"field", "hyperboloid"}, {"task", "cone"},
        {"options", {{"body", "rn-counterexample"}}}}},
      {"capped-cylinder", "cones of the capped cylinder swept along (sqrt(1+t^2), 0, t)",
       {{"name", "capped-cylinder"}, {"field", "hyperboloid"}, {"task", "cone"},
        {"options", {{"body", "capped-cylinder"}}}}},
      {"warbled", "convexify softexp o hyperboloid",
       {{"name", "warbled"}, {"field", {{"name", "warbled"}, {"sigma", "softexp"}}}, {"task", "convexify"}}},
      {"appendix-splitting", "level-flow trajectories of the hyperboloid plus bound scan",
       {{"name", "appendix-splitting"}, {"field", "hyperboloid"}, {"task", "splitting"},
        {"options", {{"chart", "level"}, {"scan", true}}}}},
      {"boost", "boost chart of the hyperboloid plus bound scan",
       {{"name", "boost"}, {"field", "hyperboloid"}, {"task", "splitting"},
        {"options", {{"chart", "boost"}, {"scan", true}, {"x_lo", -40.0}, {"x_hi", 40.0}}}}},
      {"curvature", "curvature sign census on the hyperboloid graph",
       {{"name", "curvature"}, {"field", "hyperboloid"}, {"task", "curvature"}}},
      {"degree", "winding degree of the first-exit map on the hyperboloid graph",
       {{"name", "degree"}, {"field", "hyperboloid"}, {"task", "degree"}}},
  };
  return p;
}

inline const Preset* find_preset(std::string_view name) {
  for (const Preset& p : presets())
    if (p.name == name) return &p;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

/// 1-based line of the first occurrence of "key" in the source text (0 if absent).
inline int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

[[noreturn]] inline void schema_error(const std::string& text, const std::string& field, const std::string& msg) {
  const int line = line_of_key(text, field.substr(field.rfind('.') + 1));
  throw SchemaError((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + field + ": " + msg,
                    {static_cast<double>(line)});
}

inline bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return !(a.is_number_integer() && b.is_number_float());
  return a.type() == b.type();
}

inline FieldSpec parse_field(const json& j, const std::string& text) {
  FieldSpec f;
  if (j.is_string()) {
    f.name = j.get<std::string>();
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (k == "name" && v.is_string()) f.name = v.get<std::string>();
      else if (k == "dim" && v.is_number_integer()) f.dim = v.get<int>();
      else if (k == "c" && v.is_number()) f.c = v.get<double>();
      else if (k == "sigma" && v.is_string()) f.sigma = v.get<std::string>();
      else if (k == "coeffs" && v.is_array()) f.coeffs = v.get<std::vector<double>>();
      else if (k == "offset" && v.is_number()) f.offset = v.get<double>();
      else if (k == "name" || k == "dim" || k == "c" || k == "sigma" || k == "coeffs" || k == "offset")
        schema_error(text, "field." + k, "wrong type");
      else
        schema_error(text, "field." + k, "unknown key");
    }
  } else {
    schema_error(text, "field", "must be a catalog name or an object");
  }
  static const std::vector<std::string> names{"hyperboloid", "paraboloid", "linear", "warbled"};
  if (std::find(names.begin(), names.end(), f.name) == names.end())
    schema_error(text, "field.name", "unknown field '" + f.name + "'");
  if (f.dim < 2 || f.dim > 6) schema_error(text, "field.dim", "must be between 2 and 6");
  static const std::vector<std::string> sigmas{"identity", "softexp", "log1p", "wavy"};
  if (std::find(sigmas.begin(), sigmas.end(), f.sigma) == sigmas.end())
    schema_error(text, "field.sigma", "unknown sigma '" + f.sigma + "'");
  if (f.name == "linear" && static_cast<int>(f.coeffs.size()) != f.dim)
    schema_error(text, "field.coeffs", "needs dim entries");
  return f;
}

}  // namespace detail

/// Validates a scenario object; `text` is the source used for line numbers.
inline Scenario parse_scenario(const json& j, const std::string& text = {}) {
  using detail::schema_error;
  if (!j.is_object()) schema_error(text, "scenario", "must be a JSON object");
  Scenario s;
  bool have_name = false, have_task = false;
  json given = json::object();
  for (const auto& [k, v] : j.items()) {
    if (k == "name") {
      if (!v.is_string() || v.get<std::string>().empty()) schema_error(text, "name", "must be a non-empty string");
      s.name = v.get<std::string>();
      have_name = true;
    } else if (k == "task") {
      if (!v.is_string()) schema_error(text, "task", "must be a string");
      s.task = v.get<std::string>();
      have_task = true;
    } else if (k == "field") {
      s.field = detail::parse_field(v, text);
    } else if (k == "seed") {
      if (!v.is_number_unsigned()) schema_error(text, "seed", "must be a nonnegative integer");
      s.seed = v.get<std::uint64_t>();
    } else if (k == "options") {
      if (!v.is_object()) schema_error(text, "options", "must be an object");
      given = v;
    } else if (k == "out") {
      if (!v.is_string()) schema_error(text, "out", "must be a string");
      s.out_dir = v.get<std::string>();
    } else if (k == "schema_version") {
      if (!v.is_number_integer() || v.get<int>() != schema_version)
        schema_error(text, "schema_version", "unsupported (expected " + std::to_string(schema_version) + ")");
    } else {
      schema_error(text, k, "unknown key");
    }
  }
  if (!have_name) schema_error(text, "name", "missing");
  if (!have_task) schema_error(text, "task", "missing");
  const auto& tasks = task_names();
  if (std::find(tasks.begin(), tasks.end(), s.task) == tasks.end())
    schema_error(text, "task", "unknown task '" + s.task + "'");
  s.options = option_defaults(s.task);
  for (const auto& [k, v] : given.items()) {
    if (!s.options.contains(k)) schema_error(text, "options." + k, "unknown key for task " + s.task);
    if (!detail::same_kind(s.options[k], v)) schema_error(text, "options." + k, "wrong type");
    s.options[k] = v;
  }
  return s;
}

/// Parses a file path or, when the argument starts with '{' or '[', inline JSON.
/// An array yields several scenarios.
inline std::vector<Scenario> parse_config(const std::string& path_or_json) {
  std::string text;
  const auto first = path_or_json.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (path_or_json[first] == '{' || path_or_json[first] == '[')) {
    text = path_or_json;
  } else {
    std::ifstream in(path_or_json);
    if (!in) throw SchemaError("cannot read config file '" + path_or_json + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto byte = std::min(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
    throw SchemaError("line " + std::to_string(line) + ": malformed JSON", {static_cast<double>(line)});
  }
  std::vector<Scenario> out;
  if (j.is_array()) {
    for (const json& item : j) out.push_back(parse_scenario(item, text));
    if (out.empty()) throw SchemaError("empty scenario list");
  } else {
    out.push_back(parse_scenario(j, text));
  }
  return out;
}

inline Scenario preset_scenario(std::string_view name) {
  const Preset* p = find_preset(name);
  if (!p) throw SchemaError("unknown preset '" + std::string(name) + "'");
  return parse_scenario(p->config);
}

// ---------------------------------------------------------------------------
// Fields

inline ScalarMap sigma_map(const std::string& name) {
  if (name == "identity") return identity_map();
  if (name == "softexp") return softexp_map();
  if (name == "log1p") return log1p_map();
  return wavy_map();
}

inline ScalarField make_field(const FieldSpec& f) {
  if (f.name == "paraboloid") return paraboloid_field(f.dim, f.c);
  if (f.name == "linear") return linear_field(Eigen::Map<const Vec>(f.coeffs.data(), f.dim), f.offset);
  if (f.name == "warbled") return warble(hyperboloid_field(f.dim), sigma_map(f.sigma), 1.0, 1e3);
  return hyperboloid_field(f.dim);
}

// ---------------------------------------------------------------------------
// Output

inline json meta(const Scenario& s) {
  return {{"scenario", s.name}, {"task", s.task},          {"seed", s.seed},
          {"tool", "geolab"},   {"version", tool_version}, {"schema_version", schema_version}};
}

inline std::string csv_header(const Scenario& s) {
  std::ostringstream os;
  os << "# scenario=" << s.name << " task=" << s.task << " seed=" << s.seed << " tool=geolab version=" << tool_version
     << " schema=" << schema_version << '\n';
  return os.str();
}

inline json to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json to_json(const std::vector<Vec>& vs) {
  json a = json::array();
  for (const Vec& v : vs) a.push_back(to_json(v));
  return a;
}

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> files;
  json report;
};

namespace detail {

class Writer {
 public:
  explicit Writer(const Scenario& s) : s_(s) { std::filesystem::create_directories(s.out_dir); }

  std::string path(const std::string& suffix) const {
    return (std::filesystem::path(s_.out_dir) / (s_.name + "_" + suffix)).string();
  }
  void csv(const std::string& suffix, const std::string& body) {
    std::ofstream out(path(suffix), std::ios::binary);
    out << csv_header(s_) << body;
    files.push_back(path(suffix));
  }
  void report(const std::string& suffix, json body) {
    body["meta"] = meta(s_);
    std::ofstream out(path(suffix), std::ios::binary);
    out << body.dump(2) << '\n';
    files.push_back(path(suffix));
  }

  std::vector<std::string> files;

 private:
  const Scenario& s_;
};

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

inline json run_connect(const Scenario& s, Writer& w, unsigned jobs) {
  const ScalarField u = make_field(s.field);
  const json& o = s.options;
  const int pairs = o["pairs"].get<int>();
  const double box = o["box"].get<double>();
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> coord(-box, box);
  std::ostringstream csv;
  csv << "pair,t";
  for (int i = 0; i < u.dim(); ++i) csv << ",x" << i + 1;
  csv << ",u";
  for (int i = 0; i < u.dim(); ++i) csv << ",dx" << i + 1;
  csv << ",speed2\n";
  json rows = json::array();
  int ok = 0;
  for (int k = 0; k < pairs; ++k) {
    Vec p(u.dim()), q(u.dim());
    for (int i = 0; i < u.dim(); ++i) p(i) = coord(rng);
    for (int i = 0; i < u.dim(); ++i) q(i) = coord(rng);
    ConnectOptions co;
    co.tol = o["tol"].get<double>();
    co.residual_tol = o["residual_tol"].get<double>();
    co.max_restarts = o["restarts"].get<std::size_t>();
    co.nodes = o["nodes"].get<std::size_t>();
    co.seed = s.seed + static_cast<std::uint64_t>(k);
    co.jobs = jobs;
    json row{{"pair", k}, {"p", to_json(p)}, {"q", to_json(q)}};
    try {
      const ConnectResult r = connect(u, p, q, co);
      ++ok;
      row["success"] = true;
      row["residual"] = r.residual;
      row["defect"] = r.defect;
      row["attempt"] = r.attempt;
      row["initial_velocity"] = to_json(r.initial_velocity);
      std::ostringstream t;
      write_trajectory_csv(t, u, r.trajectory);
      std::istringstream lines(t.str());
      std::string line;
      std::getline(lines, line);  // per-trajectory header
      while (std::getline(lines, line)) csv << k << ',' << line << '\n';
    } catch (const Error& e) {
      row["success"] = false;
      row["error"] = {{"kind", e.kind()}, {"message", e.what()}};
    }
    rows.push_back(row);
  }
  w.csv("trajectories.csv", csv.str());
  json rep{{"field", u.name}, {"pairs", rows}, {"successes", ok}, {"success_rate", pairs ? double(ok) / pairs : 0.0}};
  w.report("connect.json", rep);
  return rep;
}

inline json run_convexify(const Scenario& s, Writer& w) {
  const ScalarField u = make_field(s.field);
  const json& o = s.options;
  ConvexifyOptions co;
  co.levels = o["levels"].get<int>();
  co.samples = o["samples"].get<int>();
  co.span = o["span"].get<double>();
  co.probes = o["probes"].get<int>();
  co.fixed_h = o["fixed_h"].get<bool>();
  co.rho_nodes = o["rho_nodes"].get<std::size_t>();
  co.seed = s.seed;
  const ConvexifyResult r = convexify(u, euclidean_gradient(u), co);

  std::ostringstream mu;
  mu << "a,mu,mu_strict,h\n";
  for (const MuTableRow& row : r.mu_table)
    mu << fmt(row.a) << ',' << fmt(row.mu) << ',' << fmt(row.mu_strict) << ',' << fmt(row.h) << '\n';
  w.csv("mu.csv", mu.str());
  std::ostringstream rho;
  rho << "a,rho,rho1,rho2\n";
  for (std::size_t i = 0; i < r.rho.grid().size(); ++i) {
    const double a = r.rho.grid()[i];
    rho << fmt(a) << ',' << fmt(r.rho.values()[i]) << ',' << fmt(r.rho.d1(a)) << ',' << fmt(r.rho.d2(a)) << '\n';
  }
  w.csv("rho.csv", rho.str());
  json rep{{"field", u.name},
           {"minimizer", to_json(r.minimizer)},
           {"u_min", r.u_min},
           {"conditions", {{"1", r.conditions.c1}, {"2", r.conditions.c2}, {"3", r.conditions.c3}, {"4", r.conditions.c4}}},
           {"min_rho_d1", r.min_rho_d1},
           {"ode_residual", r.ode_residual},
           {"max_form_gap", r.max_form_gap},
           {"min_hessian_eigenvalue", r.min_eigenvalue},
           {"witness", to_json(r.witness)}};
  w.report("convexify.json", rep);
  return rep;
}

inline json run_cone(const Scenario& s, Writer& w) {
  const json& o = s.options;
  const std::string body = o["body"].get<std::string>();
  RecessionNormal rn = [&] {
    if (body == "rn-counterexample")
      return recession_normal(SemiSpace::minkowski(1), hyperbola_body_normals(o["normals"].get<int>()));
    if (body == "capped-cylinder")
      return recession_normal(SemiSpace::minkowski(2),
                              capped_cylinder_normals(o["normals"].get<int>(), o["extent"].get<double>()));
    if (body != "graph") throw SchemaError("options.body: unknown body '" + body + "'");
    return recession_normal(make_field(s.field), o["radius"].get<double>(), o["per_axis"].get<int>());
  }();
  const V0Search v = find_v0(rn);
  json rep{{"body", body},
           {"normal_generators", to_json(generators_of(rn.normal))},
           {"recession_generators", to_json(generators_of(rn.recession))},
           {"v0", v.found ? to_json(v.v0) : json(nullptr)},
           {"depth", v.depth},
           {"certificate", v.certificate.size() ? to_json(v.certificate) : json(nullptr)},
           {"int_N_meets_R", v.found}};
  if (v.found && body == "graph") {
    const ScalarField u = make_field(s.field);
    const ScalarField F = height_function(u, v.v0);
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    std::vector<Trajectory> trajs;
    for (int k = 0; k < o["geodesics"].get<int>(); ++k) {
      Vec p(u.dim()), vel(u.dim());
      for (int i = 0; i < u.dim(); ++i) p(i) = c(rng);
      for (int i = 0; i < u.dim(); ++i) vel(i) = c(rng);
      trajs.push_back(integrate(u, {p, vel}, 1.0, {1e-11, 201}));
    }
    const ConvexityReport cr = geodesic_convexity_report(F, trajs);
    rep["height_convexity"] = {{"geodesics", trajs.size()},
                               {"min_second_difference", cr.min_second_difference},
                               {"convex", cr.convex},
                               {"strictly_convex", cr.strictly_convex}};
  }
  w.report("cone.json", rep);
  return rep;
}

inline json extremum(const Extremum& e) { return {{"value", e.value}, {"x", e.x}, {"tau", e.tau}}; }

inline json run_splitting(const Scenario& s, Writer& w) {
  const json& o = s.options;
  const std::string chart = o["chart"].get<std::string>();
  if (chart != "level" && chart != "boost") throw SchemaError("options.chart: must be 'level' or 'boost'");
  const int count = o["trajectories"].get<int>();
  const double xlo = o["x_lo"].get<double>(), xhi = o["x_hi"].get<double>();
  const TauRange range{o["tau_lo"].get<double>(), o["tau_hi"].get<double>(), o["tau_nodes"].get<std::size_t>()};
  const double tol = o["tol"].get<double>();
  auto x_at = [&](int k) { return count < 2 ? xlo : xlo + (xhi - xlo) * k / (count - 1); };

  std::vector<LevelFlowPath> paths;
  json rep{{"chart", chart}};
  if (chart == "level") {
    for (int k = 0; k < count; ++k) paths.push_back(level_flow(x_at(k), range, tol));
    const Degeneration d = degeneration_threshold(level_flow(0.0, range, tol), 0.01);
    rep["meridian_A_below_0.01_from_tau"] = d.threshold;
    rep["meridian_A_monotone"] = d.monotone;
    double worst = 0.0;
    for (const LevelFlowPath& p : paths)
      for (const FlowNode& n : p.nodes) worst = std::max(worst, std::abs(n.beta - n.beta_closed));
    rep["max_beta_closed_form_gap"] = worst;
  } else {
    const SplitChart b = boost_chart();
    for (int k = 0; k < count; ++k) {
      LevelFlowPath p{x_at(k), {}};
      for (std::size_t i = 0; i < range.nodes; ++i) {
        const double tau = range.lo + (range.hi - range.lo) * static_cast<double>(i) / static_cast<double>(range.nodes - 1);
        const ChartJet j = b.jet(p.x0, tau);
        const SplitCoefficients c = coefficients(j);
        p.nodes.push_back({tau, j.point(0), j.point(1), j.point(2), 1.0, c.A, c.beta, boost_beta(p.x0), c.cross});
      }
      paths.push_back(std::move(p));
    }
  }
  std::ostringstream csv;
  write_level_flow_csv(csv, paths);
  w.csv(chart == "level" ? "level_flow.csv" : "boost.csv", csv.str());
  if (o["scan"].get<bool>()) {
    const SplitChart c = chart == "level" ? hyperboloid_chart(tol) : boost_chart();
    const BoundScan b = bound_scan(c, {xlo, xhi, range.lo, range.hi},
                                   {o["grid_x"].get<std::size_t>(), o["grid_tau"].get<std::size_t>()});
    rep["bound_scan"] = {{"A_inf", extremum(b.A_inf)},
                         {"A_sup", extremum(b.A_sup)},
                         {"beta_inf", extremum(b.beta_inf)},
                         {"beta_sup", extremum(b.beta_sup)},
                         {"beta_tau_sup", extremum(b.beta_tau_sup)},
                         {"A_tau_sup", extremum(b.A_tau_sup)},
                         {"max_cross", b.max_cross},
                         {"positive", b.positive},
                         {"hypotheses",
                          {{"A_bounded_below", b.A_bounded_below},
                           {"beta_bounded", b.beta_bounded},
                           {"tau_derivatives_bounded", b.tau_derivatives_bounded}}}};
  }
  w.report("splitting.json", rep);
  return rep;
}

inline json run_curvature(const Scenario& s, Writer& w) {
  const ScalarField u = make_field(s.field);
  const int n = u.dim();
  const int samples = s.options["samples"].get<int>();
  const double box = s.options["box"].get<double>();
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> c(-box, box);
  std::normal_distribution<double> g;
  std::ostringstream csv;
  csv << "sample";
  for (int i = 0; i < n; ++i) csv << ",p" << i + 1;
  csv << ",plane,R,discriminant\n";
  int timelike = 0, spacelike = 0, degenerate = 0, r_violations = 0, sign_violations = 0;
  double min_R = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    Vec p(n), x(n), y(n);
    for (int i = 0; i < n; ++i) p(i) = c(rng);
    for (int i = 0; i < n; ++i) x(i) = g(rng);
    for (int i = 0; i < n; ++i) y(i) = g(rng);
    try {
      const CurvatureSample cs = graph_curvature(u, p, x, y);
      min_R = std::min(min_R, cs.R);
      if (cs.R < -1e-9) ++r_violations;
      const bool tl = cs.plane == PlaneType::timelike;
      (tl ? timelike : spacelike)++;
      if (tl ? cs.sectional() > 1e-12 : cs.sectional() < -1e-12) ++sign_violations;
      csv << k;
      for (int i = 0; i < n; ++i) csv << ',' << fmt(p(i));
      csv << ',' << (tl ? "timelike" : "spacelike") << ',' << fmt(cs.R) << ',' << fmt(cs.discriminant) << '\n';
    } catch (const DegeneratePlane&) {
      ++degenerate;
    }
  }
  w.csv("curvature.csv", csv.str());
  json rep{{"field", u.name},         {"samples", samples},         {"timelike", timelike},
           {"spacelike", spacelike},  {"degenerate", degenerate},   {"min_R", min_R},
           {"R_violations", r_violations}, {"sign_violations", sign_violations}};
  w.report("curvature.json", rep);
  return rep;
}

inline json run_degree(const Scenario& s, Writer& w) {
  const ScalarField u = make_field(s.field);
  const Vec p = find_minimizer(u, Vec::Zero(u.dim()));
  const double a = u.value(p) + s.options["offset"].get<double>();
  const auto m = s.options["directions"].get<std::size_t>();
  const int d1 = winding_degree(u, p, a, m);
  const int d2 = winding_degree(u, p, a, 2 * m);
  json rep{{"field", u.name}, {"minimizer", to_json(p)}, {"level", a}, {"directions", m},
           {"degree", d1},    {"degree_doubled", d2},     {"stable", d1 == d2}};
  w.report("degree.json", rep);
  return rep;
}

/// True when the task's finding is negative ("method says no").
inline bool negative(const std::string& task, const json& r) {
  if (task == "connect") return r["successes"] != r["pairs"].size();
  if (task == "cone") return !r["int_N_meets_R"].get<bool>();
  if (task == "convexify")
    return !(r["conditions"]["1"].get<bool>() && r["conditions"]["2"].get<bool>() && r["conditions"]["3"].get<bool>() &&
             r["conditions"]["4"].get<bool>());
  if (task == "curvature") return r["R_violations"] != 0 || r["sign_violations"] != 0;
  if (task == "degree") return !r["stable"].get<bool>();
  return false;
}

}  // namespace detail

/// Runs one scenario. Exit code 2 marks a negative finding or a library error
/// (written to NAME_error.json); schema and dimension errors give 1.
inline RunResult run_scenario(const Scenario& s, unsigned jobs = 1) {
  detail::Writer w(s);
  RunResult res;
  try {
    if (s.task == "connect") res.report = detail::run_connect(s, w, jobs);
    else if (s.task == "convexify") res.report = detail::run_convexify(s, w);
    else if (s.task == "cone") res.report = detail::run_cone(s, w);
    else if (s.task == "splitting") res.report = detail::run_splitting(s, w);
    else if (s.task == "curvature") res.report = detail::run_curvature(s, w);
    else res.report = detail::run_degree(s, w);
    res.exit_code = detail::negative(s.task, res.report) ? 2 : 0;
  } catch (const Error& e) {
    res.exit_code = (e.kind() == "SchemaError" || e.kind() == "DimensionMismatch") ? 1 : 2;
    res.report = {{"error", {{"kind", e.kind()}, {"message", e.what()}, {"witness", e.witness()}}}};
    w.report("error.json", res.report);
  } catch (const std::exception& e) {
    res.exit_code = 1;
    res.report = {{"error", {{"kind", "internal"}, {"message", e.what()}}}};
    w.report("error.json", res.report);
  }
  res.files = w.files;
  return res;
}

}  // namespace geolab::scenario
