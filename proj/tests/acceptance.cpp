// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "geolab/cones.hpp"
#include "geolab/convexity.hpp"
#include "geolab/geodesics.hpp"
#include "geolab/scenario.hpp"
#include "geolab/splitting.hpp"

using namespace geolab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Vec uniform(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

Vec gaussian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> d;
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Verdict {
  bool pass;
  std::string detail;
};

// 1. speed conservation along geodesics
Verdict geodesic_conservation() {
  const ScalarField u = hyperboloid_field(2);
  std::mt19937_64 rng(101);
  double drift = 0.0;
  const auto t0 = Clock::now();
  for (int k = 0; k < 100; ++k) {
    const GeodesicState s{uniform(rng, 2, -3, 3), uniform(rng, 2, -1, 1)};
    drift = std::max(drift, integrate(u, s, 10.0, {1e-10, 1001}).max_drift);
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream os;
  os << "max drift " << drift << ", " << elapsed << " s";
  return {drift <= 1e-8 && elapsed <= 10.0, os.str()};
}

// 2. second difference of the lift along a geodesic against the lifted Hessian
Verdict lift_hessian() {
  const ScalarField u = hyperboloid_field(2);
  std::mt19937_64 rng(102);
  const double h = 2e-3;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Vec p = uniform(rng, 2, -3, 3);
    const Vec v = gaussian(rng, 2);
    const IntegrateOptions o{1e-12, 2};
    const Vec ahead = integrate(u, {p, v}, h, o).back().base;
    const Vec behind = integrate(u, {p, -v}, h, o).back().base;
    const double fd = (u.value(ahead) - 2.0 * u.value(p) + u.value(behind)) / (h * h);
    const double exact = lifted_hessian(u, p, v, v);
    worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
  }
  std::ostringstream os;
  os << "max relative error " << worst;
  return {worst <= 1e-4, os.str()};
}

// 3. connectedness by shooting
Verdict connectedness() {
  const ScalarField u = hyperboloid_field(2);
  std::mt19937_64 rng(103);
  int ok = 0;
  double slowest = 0.0, worst_residual = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Vec p = uniform(rng, 2, -3, 3), q = uniform(rng, 2, -3, 3);
    ConnectOptions o;
    o.seed = static_cast<std::uint64_t>(k);
    const auto t0 = Clock::now();
    try {
      const ConnectResult r = connect(u, p, q, o);
      worst_residual = std::max(worst_residual, r.residual);
      if (r.residual <= 1e-6) ++ok;
    } catch (const Error&) {
    }
    slowest = std::max(slowest, seconds_since(t0));
  }
  std::ostringstream os;
  os << ok << "/200 connected, max residual " << worst_residual << ", slowest pair " << slowest << " s";
  return {ok >= 198 && slowest <= 1.0, os.str()};
}

// 4. curvature signs on a 3-dimensional graph (both plane types occur)
Verdict curvature_signs() {
  const ScalarField u = hyperboloid_field(3);
  std::mt19937_64 rng(104);
  int timelike = 0, spacelike = 0, band = 0, bad = 0;
  double min_R = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10000; ++k) {
    const Vec p = uniform(rng, 3, -3, 3);
    try {
      const CurvatureSample c = graph_curvature(u, p, gaussian(rng, 3), gaussian(rng, 3));
      min_R = std::min(min_R, c.R);
      const bool tl = c.plane == PlaneType::timelike;
      (tl ? timelike : spacelike)++;
      if (c.R < -1e-9 || (tl ? c.sectional() > 1e-12 : c.sectional() < -1e-12)) ++bad;
    } catch (const DegeneratePlane&) {
      ++band;
    }
  }
  std::ostringstream os;
  os << "min R " << min_R << ", timelike " << timelike << ", spacelike " << spacelike << ", null band " << band
     << ", violations " << bad;
  return {bad == 0 && timelike > 0 && spacelike > 0, os.str()};
}

// 5. dual cones
Verdict cone_duality() {
  std::mt19937_64 rng(105);
  const double tol = 1e-9;
  int mismatches = 0;
  for (int n = 1; n <= 5; ++n) {
    const SemiSpace s = SemiSpace::minkowski(n);
    const LightCone F(s, true);
    const LightCone P = F.dual();
    if (P.future) ++mismatches;
    for (int j = 0; j < 1000; ++j) {
      const Vec w = gaussian(rng, n + 1);
      const bool in_dual = F.slice_minimum(w) >= -tol * w.norm();
      if (in_dual != P.contains(w)) ++mismatches;
    }
  }
  const int light_mismatches = mismatches;

  for (int i = 0; i < 100; ++i) {
    const int d = 2 + static_cast<int>(rng() % 3);
    const int k = static_cast<int>(rng() % 2) + (d == 4 ? static_cast<int>(rng() % 2) : 0);
    const SemiSpace s(d - k, k);
    std::vector<Vec> g;
    const int count = 1 + static_cast<int>(rng() % 8);
    for (int j = 0; j < count; ++j) g.push_back(gaussian(rng, d));
    std::vector<Vec> sub(g.begin(), g.begin() + 1 + static_cast<std::ptrdiff_t>(rng() % g.size()));
    std::vector<Vec> neg;
    for (const Vec& x : g) neg.push_back(-x);
    const PolyCone K = PolyCone::from_generators(s, g);
    const PolyCone D = dual_cone(K);
    const PolyCone DD = dual_cone(PolyCone::from_generators(s, *D.generators));
    for (int j = 0; j < 1000; ++j) {
      const Vec x = gaussian(rng, d);
      const bool in_D = contains_by_halfspaces(s, g, x, tol);
      // both representations of K* agree
      if (in_D != contains_by_generators(s, *D.generators, x, tol)) ++mismatches;
      // K1 in K gives K* in K1*
      if (in_D && !contains_by_halfspaces(s, sub, x, tol)) ++mismatches;
      // (-K)* = -K*
      if (contains_by_halfspaces(s, neg, x, tol) != contains_by_generators(s, *D.generators, Vec(-x), tol)) ++mismatches;
      // K** is the closed conic hull of K
      if (contains_by_generators(s, g, x, tol) != contains_by_halfspaces(s, *DD.halfspaces, x, tol)) ++mismatches;
    }
  }
  std::ostringstream os;
  os << "light cone mismatches " << light_mismatches << ", polyhedral mismatches " << mismatches - light_mismatches;
  return {mismatches == 0, os.str()};
}

scenario::RunResult run_preset(const std::string& name, const fs::path& dir) {
  scenario::Scenario s = scenario::preset_scenario(name);
  s.out_dir = dir.string();
  return scenario::run_scenario(s);
}

// 6. v0 search on the counterexample body and on the hyperboloid graph
Verdict normal_recession() {
  const fs::path root = fs::temp_directory_path() / "geolab_acceptance_cones";
  fs::remove_all(root);
  const scenario::RunResult rn = run_preset("rn-counterexample", root / "rn");
  const scenario::RunResult hy = run_preset("hyperboloid-cone", root / "hy");
  const bool rn_ok = rn.report.contains("v0") && rn.report["v0"].is_null() && rn.report["certificate"].is_array();
  bool hy_ok = hy.report.contains("v0") && !hy.report["v0"].is_null() && hy.report.contains("height_convexity");
  double second = std::numeric_limits<double>::quiet_NaN();
  if (hy_ok) {
    second = hy.report["height_convexity"]["min_second_difference"].get<double>();
    hy_ok = second >= -1e-8;
  }
  std::ostringstream os;
  os << "rn: " << (rn_ok ? "no v0, certificate " + rn.report["certificate"].dump() : "unexpected report")
     << "; hyperboloid: " << (hy.report["v0"].is_null() ? "no v0" : "v0 " + hy.report["v0"].dump())
     << ", height min second difference " << second;
  return {rn_ok && hy_ok, os.str()};
}

// 7. convexification of the warbled hyperboloid
Verdict convexify_pipeline() {
  const ScalarField u = warble(hyperboloid_field(2), softexp_map(), 1.0, 10.0);
  const ConvexifyResult r = convexify(u, euclidean_gradient(u));
  const ConditionFlags& c = r.conditions;
  const bool ok = c.c1 && c.c2 && c.c3 && c.c4 && r.min_rho_d1 >= 1.0 && r.min_eigenvalue >= -1e-8 &&
                  r.ode_residual <= 1e-6;
  std::ostringstream os;
  os << "conditions " << c.c1 << c.c2 << c.c3 << c.c4 << ", min rho' " << r.min_rho_d1 << ", min eigenvalue "
     << r.min_eigenvalue << ", ode residual " << r.ode_residual;
  return {ok, os.str()};
}

// 8. splitting coefficients
Verdict appendix() {
  double cosh_err = 0.0;
  for (double tau = 0.0; tau <= 6.0 + 1e-12; tau += 0.1) {
    const double c = std::cosh(tau);
    const double closed = (1.0 + 2.0 * c * c) / 3.0;
    cosh_err = std::max(cosh_err, std::abs(hyperboloid_beta_extracted(c, tau) - closed));
  }
  const double beta44 = hyperboloid_beta_extracted(std::cosh(4.4), 4.4);

  const LevelFlowPath meridian = level_flow(0.0);
  double meridian_err = 0.0;
  for (const FlowNode& n : meridian.nodes) meridian_err = std::max(meridian_err, std::abs(n.beta - 1.0));
  const Degeneration deg = degeneration_threshold(meridian, 0.01);

  const SplitChart b = boost_chart();
  std::mt19937_64 rng(108);
  std::uniform_real_distribution<double> xs(-10, 10), ts(-4, 4);
  double boost_err = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double x = xs(rng), t = ts(rng);
    const SplitCoefficients now = coefficients(b, x, t), later = coefficients(b, x, t + 0.7);
    boost_err = std::max({boost_err, std::abs(now.A - boost_A(x)), std::abs(now.beta - boost_beta(x)) / boost_beta(x),
                          std::abs(later.A - now.A), std::abs(later.beta - now.beta) / now.beta});
  }
  const bool ok = cosh_err <= 1e-6 && beta44 > 1e3 && meridian_err <= 1e-6 && std::isfinite(deg.threshold) &&
                  deg.monotone && boost_err <= 1e-8;
  std::ostringstream os;
  os << "cosh-curve beta error " << cosh_err << ", beta(4.4) " << beta44 << ", meridian beta error " << meridian_err
     << ", A < 0.01 for |tau| >= " << deg.threshold << (deg.monotone ? " (monotone)" : " (not monotone)")
     << ", boost error " << boost_err;
  return {ok, os.str()};
}

// 9. degree of the first-exit map
Verdict winding() {
  const ScalarField u = hyperboloid_field(2);
  const Vec p = find_minimizer(u, Vec::Zero(2));
  const double a = u.value(p) + 0.2;
  const int d = winding_degree(u, p, a, 256);
  const int d2 = winding_degree(u, p, a, 512);
  std::ostringstream os;
  os << "degree " << d << " at 256 directions, " << d2 << " at 512";
  return {d == 1 && d2 == 1, os.str()};
}

// 10. repeated preset runs write identical files
Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "geolab_acceptance_determinism";
  fs::remove_all(root);
  int compared = 0, differing = 0;
  std::string which;
  for (const scenario::Preset& pr : scenario::presets()) {
    const scenario::RunResult a = run_preset(pr.name, root / "a" / pr.name);
    const scenario::RunResult b = run_preset(pr.name, root / "b" / pr.name);
    if (a.files.size() != b.files.size()) {
      ++differing;
      which += " " + pr.name;
      continue;
    }
    for (std::size_t i = 0; i < a.files.size(); ++i) {
      if (fs::path(a.files[i]).extension() != ".csv") continue;
      ++compared;
      if (slurp(a.files[i]) != slurp(b.files[i])) {
        ++differing;
        which += " " + a.files[i];
      }
    }
  }
  std::ostringstream os;
  os << compared << " CSV files compared across " << scenario::presets().size() << " presets, " << differing
     << " differ" << which;
  return {differing == 0 && compared > 0, os.str()};
}

}  // namespace

int main() {
  const std::vector<std::function<Verdict()>> criteria{
      geodesic_conservation, lift_hessian,     connectedness, curvature_signs, cone_duality,
      normal_recession,      convexify_pipeline, appendix,    winding,         determinism};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::cout << "criterion " << i + 1 << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
