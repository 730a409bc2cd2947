#pragma once

// Orthogonal splittings  <z, z'> = A x x' - beta t t'  of timelike surfaces in
// E^3_1, the two charts of the hyperboloid graph x2 = sqrt(x1^2 + t^2 + 1),
// and surfaces ruled by parallel null lines over plane curves.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "geolab/errors.hpp"
#include "geolab/ode.hpp"
#include "geolab/semispace.hpp"

namespace geolab {

inline const SemiSpace& e31() {
  static const SemiSpace s = SemiSpace::minkowski(2);
  return s;
}

/// Embedding (x, tau) -> E^3_1 with its two partial derivatives.
struct ChartJet {
  Vec point;
  Vec dx;
  Vec dtau;
};

struct SplitChart {
  std::string name;
  std::function<ChartJet(double x, double tau)> jet;
};

/// Coefficients read off the pulled-back metric.
struct SplitCoefficients {
  double A;
  double beta;
  double cross;  // <d_x embed, d_tau embed>
};

inline SplitCoefficients coefficients(const ChartJet& j) {
  return {inner(e31(), j.dx, j.dx), -inner(e31(), j.dtau, j.dtau), inner(e31(), j.dx, j.dtau)};
}

inline SplitCoefficients coefficients(const SplitChart& c, double x, double tau) { return coefficients(c.jet(x, tau)); }

// ---------------------------------------------------------------------------
// Boost chart

inline SplitChart boost_chart() {
  return {"boost", [](double x, double tau) {
            const double r = std::sqrt(1.0 + x * x);
            const double ch = std::cosh(tau), sh = std::sinh(tau);
            ChartJet j{Vec(3), Vec(3), Vec(3)};
            j.point << x, ch * r, sh * r;
            j.dx << 1.0, ch * x / r, sh * x / r;
            j.dtau << 0.0, sh * r, ch * r;
            return j;
          }};
}

inline double boost_A(double x) { return (1.0 + 2.0 * x * x) / (1.0 + x * x); }
inline double boost_beta(double x) { return 1.0 + x * x; }

// ---------------------------------------------------------------------------
// Level-flow chart: slices t = sinh(tau), spatial coordinate carried along
// orthogonal trajectories X(x, tau) with X(x, 0) = x.

namespace detail {

inline double flow_rhs(double X, double tau) {
  const double s = std::sinh(tau), c = std::cosh(tau);
  return -X * s * c / (c * c + 2.0 * X * X);
}

inline double flow_rhs_dX(double X, double tau) {
  const double s = std::sinh(tau), c = std::cosh(tau);
  const double q = c * c + 2.0 * X * X;
  return -s * c * (c * c - 2.0 * X * X) / (q * q);
}

/// Jet at (X, J = dX/dx, tau).
inline ChartJet level_jet(double X, double J, double tau) {
  const double s = std::sinh(tau), c = std::cosh(tau);
  const double f = std::sqrt(X * X + c * c);  // = sqrt(X^2 + t^2 + 1)
  const double F = flow_rhs(X, tau);
  ChartJet j{Vec(3), Vec(3), Vec(3)};
  j.point << X, f, s;
  j.dx << J, X * J / f, 0.0;
  j.dtau << F, (X * F + s * c) / f, c;
  return j;
}

/// (X, J) from tau = 0 to tau = target, forward or backward in tau.
class FlowIntegrator {
 public:
  explicit FlowIntegrator(double tol) : tol_(tol) {}

  ode::State at(double x0, double target) const {
    ode::State y{x0, 1.0};
    if (target == 0.0) return y;
    const double dir = target > 0.0 ? 1.0 : -1.0;
    ode::Stepper st(system(dir), {tol_});
    st.advance(y, 0.0, std::abs(target));
    return y;
  }

  /// d/dsigma of (X, dX/dx) with tau = dir * sigma.
  static ode::System system(double dir) {
    return [dir](const ode::State& y, ode::State& dy, double sigma) {
      const double tau = dir * sigma;
      dy[0] = dir * flow_rhs(y[0], tau);
      dy[1] = dir * flow_rhs_dX(y[0], tau) * y[1];
    };
  }

 private:
  double tol_;
};

}  // namespace detail

inline double hyperboloid_beta_closed(double X, double tau) {
  const double c2 = std::cosh(tau) * std::cosh(tau);
  return (1.0 + 2.0 * X * X) * c2 / (2.0 * X * X + c2);
}

/// beta read off the metric at a surface point with spatial coordinate X;
/// pointwise, since d_tau embed needs only the flow direction.
inline double hyperboloid_beta_extracted(double X, double tau) {
  const ChartJet j = detail::level_jet(X, 1.0, tau);
  return -inner(e31(), j.dtau, j.dtau);
}

inline SplitChart hyperboloid_chart(double tol = 1e-10) {
  return {"hyperboloid-level", [tol](double x, double tau) {
            const ode::State y = detail::FlowIntegrator(tol).at(x, tau);
            return detail::level_jet(y[0], y[1], tau);
          }};
}

struct FlowNode {
  double tau;
  double x1, x2, t;
  double J;  // dX/dx
  double A, beta, beta_closed, cross;
};

struct LevelFlowPath {
  double x0 = 0.0;
  std::vector<FlowNode> nodes;
};

struct TauRange {
  double lo = -6.0;
  double hi = 6.0;
  std::size_t nodes = 241;
};

/// Orthogonal trajectory through (x0, tau = 0) with coefficients at uniform nodes.
inline LevelFlowPath level_flow(double x0, const TauRange& range = {}, double tol = 1e-10) {
  if (!std::isfinite(x0)) throw std::invalid_argument("level_flow: x0 must be finite");
  if (!(range.hi > range.lo) || range.nodes < 2) throw std::invalid_argument("level_flow: bad tau range");
  std::vector<double> taus(range.nodes);
  for (std::size_t i = 0; i < range.nodes; ++i)
    taus[i] = range.lo + (range.hi - range.lo) * static_cast<double>(i) / static_cast<double>(range.nodes - 1);

  LevelFlowPath path{x0, std::vector<FlowNode>(range.nodes)};
  auto record = [&](std::size_t i, const ode::State& y) {
    const ChartJet j = detail::level_jet(y[0], y[1], taus[i]);
    const SplitCoefficients k = coefficients(j);
    path.nodes[i] = {taus[i], j.point(0), j.point(1), j.point(2), y[1],
                     k.A, k.beta, hyperboloid_beta_closed(y[0], taus[i]), k.cross};
  };
  for (double dir : {1.0, -1.0}) {
    ode::GridStepper st(detail::FlowIntegrator::system(dir), {tol});
    ode::State y{x0, 1.0};
    double sigma = 0.0;
    // nodes on this side of tau = 0, ordered away from it
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < taus.size(); ++i)
      if (dir > 0 ? taus[i] >= 0.0 : taus[i] < 0.0) order.push_back(i);
    if (dir < 0) std::reverse(order.begin(), order.end());
    for (std::size_t i : order) {
      const double target = dir * taus[i];
      if (target > sigma) st.advance(y, sigma, target - sigma);
      sigma = std::max(sigma, target);
      record(i, y);
    }
  }
  return path;
}

/// Smallest node tau >= 0 from which A stays below `level` to the end of the
/// path; NaN if A never settles below it.
struct Degeneration {
  double threshold = std::numeric_limits<double>::quiet_NaN();
  bool monotone = false;  // A non-increasing in |tau| over the scanned side
};

inline Degeneration degeneration_threshold(const LevelFlowPath& path, double level) {
  Degeneration d;
  std::vector<const FlowNode*> side;
  for (const FlowNode& n : path.nodes)
    if (n.tau >= 0.0) side.push_back(&n);
  d.monotone = true;
  for (std::size_t i = 1; i < side.size(); ++i)
    if (side[i]->A > side[i - 1]->A) d.monotone = false;
  for (std::size_t i = side.size(); i-- > 0;) {
    if (side[i]->A >= level) break;
    d.threshold = side[i]->tau;
  }
  return d;
}

inline void write_level_flow_csv(std::ostream& os, const std::vector<LevelFlowPath>& paths) {
  os << "x0,tau,x1,x2,t,beta,A\n";
  const auto old = os.precision(17);
  for (const LevelFlowPath& p : paths)
    for (const FlowNode& n : p.nodes)
      os << p.x0 << ',' << n.tau << ',' << n.x1 << ',' << n.x2 << ',' << n.t << ',' << n.beta << ',' << n.A << '\n';
  os.precision(old);
}

// ---------------------------------------------------------------------------
// Hypothesis bounds

struct Region {
  double x_lo = -3.0, x_hi = 3.0;
  double tau_lo = -6.0, tau_hi = 6.0;
};

struct ScanGrid {
  std::size_t nx = 25;
  std::size_t ntau = 49;
};

struct BoundLimits {
  double a_floor = 0.01;    // A below this counts as degenerating
  double beta_cap = 1e3;    // beta above this counts as unbounded
  double b_floor = 1e-3;    // beta below this counts as degenerating
  double d_cap = 1e3;       // bound on |beta_tau| and |A_tau|
};

struct Extremum {
  double value;
  double x;
  double tau;
};

struct BoundScan {
  Extremum A_inf, A_sup, beta_inf, beta_sup;
  Extremum beta_tau_sup, A_tau_sup;  // sup of |d/dtau|
  double max_cross = 0.0;
  bool A_bounded_below = true;
  bool beta_bounded = true;
  bool tau_derivatives_bounded = true;
  bool positive = true;  // A > 0 and beta > 0 at every grid point
};

inline BoundScan bound_scan(const SplitChart& chart, const Region& region = {}, const ScanGrid& grid = {},
                            const BoundLimits& lim = {}) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  BoundScan s{{inf, 0, 0}, {-inf, 0, 0}, {inf, 0, 0}, {-inf, 0, 0}, {-inf, 0, 0}, {-inf, 0, 0}};
  auto lerp = [](double lo, double hi, std::size_t i, std::size_t n) {
    return n < 2 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  const double h = 1e-4;
  for (std::size_t i = 0; i < grid.nx; ++i) {
    const double x = lerp(region.x_lo, region.x_hi, i, grid.nx);
    for (std::size_t k = 0; k < grid.ntau; ++k) {
      const double tau = lerp(region.tau_lo, region.tau_hi, k, grid.ntau);
      const SplitCoefficients c = coefficients(chart, x, tau);
      const SplitCoefficients up = coefficients(chart, x, tau + h);
      const SplitCoefficients dn = coefficients(chart, x, tau - h);
      const double bt = std::abs(up.beta - dn.beta) / (2.0 * h);
      const double at = std::abs(up.A - dn.A) / (2.0 * h);
      auto lower = [&](Extremum& e, double v) {
        if (v < e.value) e = {v, x, tau};
      };
      auto upper = [&](Extremum& e, double v) {
        if (v > e.value) e = {v, x, tau};
      };
      lower(s.A_inf, c.A);
      upper(s.A_sup, c.A);
      lower(s.beta_inf, c.beta);
      upper(s.beta_sup, c.beta);
      upper(s.beta_tau_sup, bt);
      upper(s.A_tau_sup, at);
      s.max_cross = std::max(s.max_cross, std::abs(c.cross));
      if (!(c.A > 0.0 && c.beta > 0.0)) s.positive = false;
    }
  }
  s.A_bounded_below = s.A_inf.value >= lim.a_floor;
  s.beta_bounded = s.beta_inf.value >= lim.b_floor && s.beta_sup.value <= lim.beta_cap;
  s.tau_derivatives_bounded = s.beta_tau_sup.value <= lim.d_cap && s.A_tau_sup.value <= lim.d_cap;
  return s;
}

// ---------------------------------------------------------------------------
// Null-ruled surfaces L = {(p + t v, t) : p in C}

struct PlaneCurve {
  std::string name;
  std::function<Vec(double)> point;
  std::function<Vec(double)> tangent;  // not necessarily unit
  double s_lo;
  double s_hi;
  bool closed;
};

inline PlaneCurve unit_circle() {
  return {"circle",
          [](double s) -> Vec { return (Vec(2) << std::cos(s), std::sin(s)).finished(); },
          [](double s) -> Vec { return (Vec(2) << -std::sin(s), std::cos(s)).finished(); },
          0.0, 2.0 * std::numbers::pi, true};
}

/// x2 = 1 + x1^2 for x1 in [-extent, extent].
inline PlaneCurve parabola(double extent = 3.0) {
  return {"parabola",
          [](double s) -> Vec { return (Vec(2) << s, 1.0 + s * s).finished(); },
          [](double s) -> Vec { return (Vec(2) << 1.0, 2.0 * s).finished(); },
          -extent, extent, false};
}

/// Unit normal: tangent rotated by -90 degrees.
inline Vec curve_normal(const PlaneCurve& c, double s) {
  const Vec T = c.tangent(s);
  Vec N(2);
  N << T(1), -T(0);
  return N / N.norm();
}

class NullRuledSurface {
 public:
  NullRuledSurface(PlaneCurve curve, Vec v) : curve_(std::move(curve)), v_(std::move(v)) {}

  Vec point(double s, double t) const {
    const Vec p = curve_.point(s);
    return (Vec(3) << p(0) + t * v_(0), p(1) + t * v_(1), t).finished();
  }
  Vec normal(double s) const {
    const Vec N = curve_normal(curve_, s);
    return (Vec(3) << N(0), N(1), N.dot(v_)).finished();
  }
  /// Null generator v + d/dt, a Killing field of L.
  Vec killing() const { return (Vec(3) << v_(0), v_(1), 1.0).finished(); }
  Vec tangent_s(double s) const {
    const Vec T = curve_.tangent(s);
    return (Vec(3) << T(0), T(1), 0.0).finished();
  }

  const PlaneCurve& curve() const { return curve_; }
  const Vec& direction() const { return v_; }

 private:
  PlaneCurve curve_;
  Vec v_;
};

struct NullRuledCheck {
  double min_normal_square = std::numeric_limits<double>::infinity();  // <N_L, N_L>
  double max_killing_pairing = 0.0;                                     // |<K, N_L>|
  double killing_square = 0.0;                                          // <K, K>
};

/// Validates C against v on `samples` parameters and builds L. A sign change of
/// <T, v> between samples is located by bisection and reported.
inline NullRuledSurface null_ruled(const PlaneCurve& c, const Vec& v, std::size_t samples = 2001,
                                   NullRuledCheck* check = nullptr) {
  if (v.size() != 2 || std::abs(v.norm() - 1.0) > 1e-12) throw std::invalid_argument("null_ruled: v must be a unit vector in E^2");
  auto g = [&](double s) {
    const Vec T = c.tangent(s);
    return T.dot(v) / T.norm();
  };
  auto report = [&](double s) {
    const Vec p = c.point(s);
    throw OrthogonalTangentPoint("curve tangent is orthogonal to v", {p(0), p(1)});
  };
  const std::size_t n = std::max<std::size_t>(samples, 2);
  const double span = c.s_hi - c.s_lo;
  auto param = [&](std::size_t i) { return c.s_lo + span * static_cast<double>(i) / static_cast<double>(n - 1); };
  double prev = g(param(0));
  if (std::abs(prev) <= 1e-9) report(param(0));
  for (std::size_t i = 1; i < n; ++i) {
    const double cur = g(param(i));
    if (std::abs(cur) <= 1e-9) report(param(i));
    if ((cur > 0.0) != (prev > 0.0)) {
      double lo = param(i - 1), hi = param(i);
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        ((g(mid) > 0.0) == (prev > 0.0) ? lo : hi) = mid;
      }
      report(0.5 * (lo + hi));
    }
    prev = cur;
  }
  NullRuledSurface L(c, v);
  if (check) {
    *check = {};
    check->killing_square = inner(e31(), L.killing(), L.killing());
    for (std::size_t i = 0; i < n; ++i) {
      const Vec N = L.normal(param(i));
      check->min_normal_square = std::min(check->min_normal_square, inner(e31(), N, N));
      check->max_killing_pairing = std::max(check->max_killing_pairing, std::abs(inner(e31(), L.killing(), N)));
    }
  }
  return L;
}

// ---------------------------------------------------------------------------
// Condition on connecting curves: <alpha', v> of constant sign or identically zero

enum class DiamondClass { constant_sign, vanishes, mixed };

inline std::string_view to_string(DiamondClass c) {
  switch (c) {
    case DiamondClass::constant_sign: return "constant_sign";
    case DiamondClass::vanishes: return "vanishes";
    case DiamondClass::mixed: return "mixed";
  }
  return "?";
}

struct DiamondArc {
  DiamondClass kind;
  std::vector<double> params;  // curve parameters along the arc, p to q
};

struct DiamondResult {
  DiamondClass best;
  std::vector<double> path;
  std::vector<DiamondArc> arcs;  // every candidate examined
};

/// Searches the arcs of C from parameter sp to sq: one arc on an open curve,
/// both directions around a closed one. Throws PathSearchExhausted when every
/// arc mixes signs; this is inconclusive, not a disproof.
inline DiamondResult diamond_check(const PlaneCurve& c, const Vec& v, double sp, double sq,
                                   std::size_t samples = 1001) {
  auto in_range = [&](double s) { return s >= c.s_lo - 1e-12 && s <= c.s_hi + 1e-12; };
  if (!in_range(sp) || !in_range(sq)) throw std::invalid_argument("diamond_check: parameter outside the curve");

  auto classify = [&](double from, double to) {
    DiamondArc arc{DiamondClass::vanishes, {}};
    const std::size_t n = std::max<std::size_t>(samples, 2);
    bool pos = false, neg = false;
    const double dir = to >= from ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = from + (to - from) * static_cast<double>(i) / static_cast<double>(n - 1);
      arc.params.push_back(s);
      if (from == to) continue;
      const Vec T = dir * c.tangent(s);
      const double g = T.dot(v) / T.norm();
      if (g > 1e-12) pos = true;
      if (g < -1e-12) neg = true;
    }
    arc.kind = pos && neg ? DiamondClass::mixed : (pos || neg) ? DiamondClass::constant_sign : DiamondClass::vanishes;
    return arc;
  };

  DiamondResult r{DiamondClass::mixed, {}, {}};
  if (sp == sq) {
    r.arcs.push_back(classify(sp, sq));
  } else {
    r.arcs.push_back(classify(sp, sq));
    if (c.closed) {
      const double period = c.s_hi - c.s_lo;
      r.arcs.push_back(classify(sp, sq > sp ? sq - period : sq + period));
    }
  }
  auto rank = [](DiamondClass k) { return k == DiamondClass::vanishes ? 0 : k == DiamondClass::constant_sign ? 1 : 2; };
  const DiamondArc* best = &r.arcs.front();
  for (const DiamondArc& a : r.arcs)
    if (rank(a.kind) < rank(best->kind)) best = &a;
  r.best = best->kind;
  r.path = best->params;
  if (r.best == DiamondClass::mixed) {
    const Vec p = c.point(sp), q = c.point(sq);
    throw PathSearchExhausted("no arc of " + c.name + " keeps <alpha', v> of one sign", {p(0), p(1), q(0), q(1)});
  }
  return r;
}

}  // namespace geolab
