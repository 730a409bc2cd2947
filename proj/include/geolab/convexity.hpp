#pragma once

// Convexification of a function with a single minimum through a
// reparametrization f = rho o u, where rho'' + h rho' = 0 and h bounds the
// level-set quantity mu from below.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "geolab/errors.hpp"
#include "geolab/fields.hpp"
#include "geolab/geodesics.hpp"

namespace geolab {

/// Vector field N with N u > 0 away from the critical set.
struct TransversalField {
  std::string name;
  std::function<Vec(const Vec&)> at;
};

/// N = coordinate gradient of u (the auxiliary Euclidean gradient).
inline TransversalField euclidean_gradient(const ScalarField& u) {
  return {"euclidean-gradient", [u](const Vec& p) -> Vec { return u.diff(p); }};
}

/// N(p) = p.
inline TransversalField position_field() {
  return {"position", [](const Vec& p) -> Vec { return p; }};
}

inline double eta(const ScalarField& u, const TransversalField& N, const Vec& p) {
  const Vec n = N.at(p);
  const double nu = u.diff(p).dot(n);
  if (!(nu > 0.0))
    throw CriticalPoint("N u = " + std::to_string(nu) + " is not positive",
                        std::vector<double>(p.data(), p.data() + p.size()));
  return n.dot(u.hess(p) * n) / (nu * nu);
}

// ---------------------------------------------------------------------------
// Level sets

struct LevelSample {
  double a = 0.0;
  std::vector<Vec> points;
  std::vector<Mat> frames;  // columns: orthonormal basis of ker du(p)
};

/// Orthonormal basis of the Euclidean complement of the covector du.
inline Mat tangent_frame(const Vec& du) {
  const auto n = du.size();
  const Mat Q = du.householderQr().householderQ();
  return Q.rightCols(n - 1);
}

/// Unit directions: equally spaced angles in the plane, seeded Gaussian otherwise.
inline std::vector<Vec> ray_directions(int dim, int count, std::uint64_t seed = 0) {
  std::vector<Vec> out;
  if (dim == 1) return {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  if (dim == 2) {
    for (int j = 0; j < count; ++j) {
      const double th = 2.0 * std::numbers::pi * (j + 0.5) / count;
      Vec v(2);
      v << std::cos(th), std::sin(th);
      out.push_back(v);
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  while (static_cast<int>(out.size()) < count) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = g(rng);
    if (v.norm() > 1e-6) out.push_back(v / v.norm());
  }
  return out;
}

/// Point where the ray centre + r d first reaches u = a, by bracketing and bisection.
inline Vec solve_on_ray(const ScalarField& u, const Vec& centre, const Vec& d, double a) {
  double lo = 0.0, hi = 1.0;
  int grow = 0;
  while (u.value(centre + hi * d) < a) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 60) throw NotFound("level " + std::to_string(a) + " not reached along a ray");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = u.value(centre + mid * d) - a;
    if (std::abs(g) <= 1e-12 * std::max(1.0, std::abs(a))) return centre + mid * d;
    (g < 0.0 ? lo : hi) = mid;
    if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
  }
  return centre + 0.5 * (lo + hi) * d;
}

inline LevelSample sample_level(const ScalarField& u, const Vec& centre, double a, int count,
                                std::uint64_t seed = 0) {
  LevelSample s;
  s.a = a;
  for (const Vec& d : ray_directions(u.dim(), count, seed)) {
    const Vec p = solve_on_ray(u, centre, d, a);
    s.points.push_back(p);
    s.frames.push_back(tangent_frame(u.diff(p)));
  }
  return s;
}

// ---------------------------------------------------------------------------
// mu

struct MuValue {
  double general = 0.0;  // inf of eta - Hess(x,N)^2 / ((Nu)^2 Hess(x,x)) over the sample
  double strict = std::numeric_limits<double>::quiet_NaN();  // determinant form, when defined
  double max_form_gap = 0.0;  // largest per-point disagreement of the two forms
  Vec argmin;
};

/// Per-point terms of mu at p with tangent frame T.
struct MuTerms {
  double general;
  double strict;  // NaN unless the tangent Hessian is positive definite
};

inline MuTerms mu_at(const ScalarField& u, const TransversalField& N, const Vec& p, const Mat& T) {
  const Vec n = N.at(p);
  const double nu = u.diff(p).dot(n);
  if (!(nu > 0.0))
    throw CriticalPoint("N u = " + std::to_string(nu) + " is not positive",
                        std::vector<double>(p.data(), p.data() + p.size()));
  const Mat H = u.hess(p);
  const Mat HT = T.transpose() * H * T;
  const Vec b = T.transpose() * H * n;
  const double hnn = n.dot(H * n);
  const double scale = std::max(1.0, H.norm());

  Eigen::SelfAdjointEigenSolver<Mat> eig(HT);
  const Vec lam = eig.eigenvalues();
  const Mat V = eig.eigenvectors();
  auto witness = [&](const Vec& x) {
    std::vector<double> w(p.data(), p.data() + p.size());
    const Vec tx = T * x;
    w.insert(w.end(), tx.data(), tx.data() + tx.size());
    return w;
  };
  if (lam.size() > 0 && lam(0) < -1e-10 * scale)
    throw NegativeTangentHessian("Hess u is negative on a tangent direction of the level set", witness(V.col(0)));

  // Pseudo-inverse quadratic form b^T HT^+ b, after checking condition (3)
  // on the numerically null tangent directions.
  double quad = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const double c = V.col(i).dot(b);
    if (std::abs(lam(i)) <= 1e-10 * scale) {
      if (std::abs(c) > 1e-6 * n.norm())
        throw ConditionThreeViolated("Hess u(x, N) != 0 on a null tangent direction x", witness(V.col(i)));
      continue;
    }
    quad += c * c / lam(i);
  }
  MuTerms out{(hnn - quad) / (nu * nu), std::numeric_limits<double>::quiet_NaN()};

  if (lam.size() == 0 || lam(0) > 1e-10 * scale) {
    const auto k = HT.rows();
    Mat full(k + 1, k + 1);
    full.topLeftCorner(k, k) = HT;
    full.topRightCorner(k, 1) = b;
    full.bottomLeftCorner(1, k) = b.transpose();
    full(k, k) = hnn;
    const double det_t = k == 0 ? 1.0 : HT.determinant();
    out.strict = full.determinant() / det_t / (nu * nu);
  }
  return out;
}

inline MuValue mu(const ScalarField& u, const TransversalField& N, const LevelSample& s) {
  MuValue out;
  out.general = std::numeric_limits<double>::infinity();
  double strict = std::numeric_limits<double>::infinity();
  bool all_strict = true;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const MuTerms t = mu_at(u, N, s.points[i], s.frames[i]);
    if (t.general < out.general) {
      out.general = t.general;
      out.argmin = s.points[i];
    }
    if (std::isnan(t.strict)) {
      all_strict = false;
    } else {
      strict = std::min(strict, t.strict);
      out.max_form_gap = std::max(out.max_form_gap, std::abs(t.strict - t.general));
    }
  }
  if (all_strict && !s.points.empty()) out.strict = strict;
  return out;
}

// ---------------------------------------------------------------------------
// h and rho

/// Continuous piecewise-linear function, constant beyond its end knots.
struct PiecewiseLinear {
  std::vector<double> knots;
  std::vector<double> values;

  double operator()(double a) const {
    if (knots.empty()) return 0.0;
    if (a <= knots.front()) return values.front();
    if (a >= knots.back()) return values.back();
    const auto it = std::upper_bound(knots.begin(), knots.end(), a);
    const std::size_t i = static_cast<std::size_t>(it - knots.begin()) - 1;
    const double w = (a - knots[i]) / (knots[i + 1] - knots[i]);
    return (1.0 - w) * values[i] + w * values[i + 1];
  }

  /// Exact integral from x to y (either order).
  double integral(double x, double y) const {
    if (x > y) return -integral(y, x);
    if (knots.empty() || x == y) return 0.0;
    std::vector<double> cuts{x};
    for (double k : knots)
      if (k > x && k < y) cuts.push_back(k);
    cuts.push_back(y);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      total += 0.5 * (cuts[i + 1] - cuts[i]) * ((*this)(cuts[i]) + (*this)(cuts[i + 1]));
    return total;
  }

  double min_value() const { return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end()); }

  /// min(h, 0), with knots added where h crosses zero so the result stays exact.
  PiecewiseLinear nonpositive() const {
    PiecewiseLinear out;
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (i > 0 && (values[i - 1] < 0.0) != (values[i] < 0.0) && values[i - 1] != 0.0 && values[i] != 0.0) {
        const double w = values[i - 1] / (values[i - 1] - values[i]);
        out.knots.push_back(knots[i - 1] + w * (knots[i] - knots[i - 1]));
        out.values.push_back(0.0);
      }
      out.knots.push_back(knots[i]);
      out.values.push_back(std::min(values[i], 0.0));
    }
    return out;
  }
};

struct MuRow {
  double a;
  double mu;
};

/// Piecewise-linear minorant through (a_i, mu_i - delta), delta = 0.05 (1 + |min mu|).
inline PiecewiseLinear fit_h(const std::vector<MuRow>& table) {
  if (table.empty()) throw std::invalid_argument("fit_h: empty table");
  double lowest = std::numeric_limits<double>::infinity();
  for (const MuRow& r : table) {
    if (!std::isfinite(r.mu)) throw std::invalid_argument("fit_h: non-finite mu");
    lowest = std::min(lowest, r.mu);
  }
  const double delta = 0.05 * (1.0 + std::abs(lowest));
  PiecewiseLinear h;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i > 0 && !(table[i].a > table[i - 1].a)) throw std::invalid_argument("fit_h: levels must increase");
    h.knots.push_back(table[i].a);
    h.values.push_back(table[i].mu - delta);
  }
  return h;
}

/// rho with rho(a0) = a0 and rho' = exp(-int_{a0}^a h), for h <= 0.
class Rho {
 public:
  Rho(PiecewiseLinear h, double a0, double a1, std::size_t nodes = 2001)
      : h_(std::move(h)), a0_(a0), a1_(a1) {
    if (!(a1 > a0) || nodes < 2) throw std::invalid_argument("solve_rho: need a1 > a0 and two nodes");
    grid_.resize(nodes);
    values_.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i)
      grid_[i] = a0 + (a1 - a0) * static_cast<double>(i) / static_cast<double>(nodes - 1);
    values_[0] = a0;
    for (std::size_t i = 1; i < nodes; ++i) values_[i] = values_[i - 1] + integrate_d1(grid_[i - 1], grid_[i]);
  }

  double d1(double a) const { return std::exp(-h_.integral(a0_, a)); }
  double d2(double a) const { return -h_(a) * d1(a); }

  double operator()(double a) const {
    if (a <= a0_) return a0_ + integrate_d1(a0_, a);
    std::size_t i = std::min(grid_.size() - 1,
                             static_cast<std::size_t>((a - a0_) / (a1_ - a0_) * static_cast<double>(grid_.size() - 1)));
    while (i > 0 && grid_[i] > a) --i;
    return values_[i] + integrate_d1(grid_[i], a);
  }

  const PiecewiseLinear& h() const { return h_; }
  double a0() const { return a0_; }
  double a1() const { return a1_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }

  /// max |rho'' + h rho'| with rho'' from five-point second differences of
  /// the tabulated rho, skipping stencils that straddle a knot of h.
  double ode_residual() const {
    double worst = 0.0;
    const double step = grid_[1] - grid_[0];
    for (std::size_t i = 2; i + 2 < grid_.size(); ++i) {
      const bool kink = std::any_of(h_.knots.begin(), h_.knots.end(),
                                    [&](double k) { return k > grid_[i - 2] && k < grid_[i + 2]; });
      if (kink) continue;
      const double fd = (-values_[i + 2] + 16.0 * values_[i + 1] - 30.0 * values_[i] + 16.0 * values_[i - 1] -
                         values_[i - 2]) /
                        (12.0 * step * step);
      worst = std::max(worst, std::abs(fd + h_(grid_[i]) * d1(grid_[i])));
    }
    return worst;
  }

  double min_d1() const {
    double m = std::numeric_limits<double>::infinity();
    for (double a : grid_) m = std::min(m, d1(a));
    for (double k : h_.knots)
      if (k >= a0_ && k <= a1_) m = std::min(m, d1(k));
    return m;
  }

 private:
  double integrate_d1(double x, double y) const {
    if (x == y) return 0.0;
    const double sign = x < y ? 1.0 : -1.0;
    const double lo = std::min(x, y), hi = std::max(x, y);
    std::vector<double> cuts{lo};
    for (double k : h_.knots)
      if (k > lo && k < hi) cuts.push_back(k);
    cuts.push_back(hi);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          [this](double s) { return d1(s); }, cuts[i], cuts[i + 1], 5, 1e-14);
    return sign * total;
  }

  PiecewiseLinear h_;
  double a0_, a1_;
  std::vector<double> grid_;
  std::vector<double> values_;
};

/// Clamps h to min(h, 0) and tabulates rho on [a0, a1].
inline Rho solve_rho(const PiecewiseLinear& h, double a0, double a1, std::size_t nodes = 2001) {
  return Rho(h.nonpositive(), a0, a1, nodes);
}

/// rho o u with Hess = rho''(u) du du^T + rho'(u) Hess u.
inline ScalarField compose(const Rho& rho, const ScalarField& u) {
  ScalarMap m{"rho", [rho](double s) { return rho(s); }, [rho](double s) { return rho.d1(s); },
              [rho](double s) { return rho.d2(s); }};
  return compose(m, u);
}

// ---------------------------------------------------------------------------
// Pipeline

struct ConvexifyOptions {
  int levels = 40;
  int samples = 64;          // points per level
  double span = 4.0;         // levels cover (u_min, u_min + span]
  double near_fraction = 0.05;  // lowest level at u_min + near_fraction * span
  int probes = 1000;
  bool fixed_h = false;      // force h = 0 (rho = identity)
  std::uint64_t seed = 0;
  Vec start;                 // Newton start for the minimizer (default origin)
  std::size_t rho_nodes = 2001;
};

struct ConditionFlags {
  bool c1 = false;  // Hess u PSD at the minimizer
  bool c2 = false;  // Hess u PSD on level tangents
  bool c3 = false;  // null tangent directions are Hess-orthogonal to N
  bool c4 = false;  // mu finite and h <= mu at every level
};

struct MuTableRow {
  double a;
  double mu;
  double mu_strict;  // NaN where the determinant form is undefined
  double h;
};

struct ConvexifyResult {
  Vec minimizer;
  double u_min = 0.0;
  ConditionFlags conditions;
  std::vector<MuTableRow> mu_table;
  double max_form_gap = 0.0;
  PiecewiseLinear h;  // fitted, before clamping
  Rho rho;
  ScalarField f;
  double min_eigenvalue = 0.0;
  Vec witness;
  double min_rho_d1 = 0.0;
  double ode_residual = 0.0;
};

/// Newton iteration for the critical point of u with a backtracking guard.
inline Vec find_minimizer(const ScalarField& u, Vec p) {
  for (int it = 0; it < 100; ++it) {
    const Vec g = u.diff(p);
    if (g.norm() <= 1e-13) return p;
    Vec step = u.hess(p).ldlt().solve(-g);
    if (!step.allFinite() || g.dot(step) >= 0.0) step = -g;
    double t = 1.0;
    while (t > 1e-12 && u.value(p + t * step) > u.value(p) + 1e-4 * t * g.dot(step)) t *= 0.5;
    p += t * step;
  }
  if (u.diff(p).norm() > 1e-8) throw NotFound("no critical point found");
  return p;
}

/// Random points of the sublevel set {u <= u_min + span}, uniform in level.
inline std::vector<Vec> sublevel_probes(const ScalarField& u, const Vec& centre, double u_min, double span,
                                        int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> level(0.0, span);
  std::normal_distribution<double> g;
  std::vector<Vec> out;
  while (static_cast<int>(out.size()) < count) {
    Vec d(u.dim());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = g(rng);
    if (d.norm() < 1e-6) continue;
    const double a = u_min + level(rng);
    out.push_back(a <= u_min ? centre : solve_on_ray(u, centre, d / d.norm(), a));
  }
  return out;
}

inline ConvexifyResult convexify(const ScalarField& u, const TransversalField& N, const ConvexifyOptions& opts = {}) {
  const int n = u.dim();
  const Vec p0 = find_minimizer(u, opts.start.size() == n ? opts.start : Vec::Zero(n));
  const double umin = u.value(p0);

  ConditionFlags flags;
  flags.c1 = Eigen::SelfAdjointEigenSolver<Mat>(u.hess(p0)).eigenvalues()(0) >= -1e-10;
  if (!flags.c1) throw FailedVerification("Hess u is not positive semidefinite at the minimizer", {p0.data(), p0.data() + n});

  std::vector<MuRow> rows;
  std::vector<double> strict;
  double gap = 0.0;
  for (int i = 0; i < opts.levels; ++i) {
    const double frac = opts.levels == 1 ? 1.0
                                         : opts.near_fraction + (1.0 - opts.near_fraction) * i / (opts.levels - 1);
    const double a = umin + frac * opts.span;
    const LevelSample s = sample_level(u, p0, a, opts.samples, opts.seed + static_cast<std::uint64_t>(i));
    for (const Vec& p : s.points)
      if (u.diff(p).norm() <= 1e-8) throw CriticalPoint("second critical point on a level", {p.data(), p.data() + n});
    const MuValue m = mu(u, N, s);  // throws on conditions (2) and (3)
    rows.push_back({a, m.general});
    strict.push_back(m.strict);
    gap = std::max(gap, m.max_form_gap);
  }
  flags.c2 = flags.c3 = true;

  PiecewiseLinear h = opts.fixed_h ? PiecewiseLinear{{umin, umin + opts.span}, {0.0, 0.0}} : fit_h(rows);
  Rho rho = solve_rho(h, umin, umin + opts.span, opts.rho_nodes);

  flags.c4 = true;
  std::vector<MuTableRow> table;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double hv = rho.h()(rows[i].a);
    if (!std::isfinite(rows[i].mu) || hv > rows[i].mu) flags.c4 = false;
    table.push_back({rows[i].a, rows[i].mu, strict[i], hv});
  }

  ConvexifyResult res{p0, umin, flags, table, gap, h, rho, compose(rho, u), 0.0, Vec(), 0.0, 0.0};
  res.min_rho_d1 = rho.min_d1();
  res.ode_residual = rho.ode_residual();

  double lowest = std::numeric_limits<double>::infinity();
  for (const Vec& p : sublevel_probes(u, p0, umin, opts.span, opts.probes, opts.seed ^ 0x9e3779b97f4a7c15ULL)) {
    const double e = Eigen::SelfAdjointEigenSolver<Mat>(res.f.hess(p)).eigenvalues()(0);
    if (e < lowest) {
      lowest = e;
      res.witness = p;
    }
  }
  res.min_eigenvalue = lowest;
  if (lowest < -1e-8)
    throw FailedVerification("Hess(rho o u) has eigenvalue " + std::to_string(lowest),
                             {res.witness.data(), res.witness.data() + n});
  return res;
}

// ---------------------------------------------------------------------------
// Warbled functions

inline ScalarMap identity_map() {
  return {"identity", [](double s) { return s; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
}

/// s - (1 - e^{-s}) / 2, slope in (1/2, 1] for s >= 0.
inline ScalarMap softexp_map() {
  return {"softexp", [](double s) { return s - 0.5 * (1.0 - std::exp(-s)); },
          [](double s) { return 1.0 - 0.5 * std::exp(-s); }, [](double s) { return 0.5 * std::exp(-s); }};
}

inline ScalarMap log1p_map() {
  return {"log1p", [](double s) { return std::log1p(s); }, [](double s) { return 1.0 / (1.0 + s); },
          [](double s) { return -1.0 / ((1.0 + s) * (1.0 + s)); }};
}

/// 0.8 s + 0.2 sin s: slope in [0.6, 1], not convex.
inline ScalarMap wavy_map() {
  return {"wavy", [](double s) { return 0.8 * s + 0.2 * std::sin(s); },
          [](double s) { return 0.8 + 0.2 * std::cos(s); }, [](double s) { return -0.2 * std::sin(s); }};
}

/// sigma o f after checking 0 < sigma' <= 1 on a grid of [lo, hi].
inline ScalarField warble(const ScalarField& f, const ScalarMap& sigma, double lo, double hi, int grid = 10001) {
  for (int i = 0; i < grid; ++i) {
    const double s = lo + (hi - lo) * i / std::max(1, grid - 1);
    const double d = sigma.d1(s);
    if (!(d > 0.0 && d <= 1.0 + 1e-15))
      throw SigmaSlopeViolation(sigma.name + "' = " + std::to_string(d) + " outside (0, 1]", {s, d});
  }
  return compose(sigma, f);
}

// ---------------------------------------------------------------------------
// Convexity along geodesics

struct ConvexityReport {
  double min_second_difference = std::numeric_limits<double>::infinity();
  bool convex = false;
  bool strictly_convex = false;
  std::size_t trajectory = 0;  // witness of the minimum
  std::size_t node = 0;
  Vec point;
};

/// Minimum over interior nodes of the second difference of F along uniform
/// trajectories, in units of the parameter step.
inline ConvexityReport geodesic_convexity_report(const ScalarField& F, const std::vector<Trajectory>& trajs,
                                                 double tol = 1e-8) {
  ConvexityReport r;
  for (std::size_t k = 0; k < trajs.size(); ++k) {
    const Trajectory& tr = trajs[k];
    if (tr.size() < 3) continue;
    const double h = tr.params[1] - tr.params[0];
    std::vector<double> vals(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) vals[i] = F.value(tr.states[i].base);
    for (std::size_t i = 1; i + 1 < tr.size(); ++i) {
      const double d2 = (vals[i + 1] - 2.0 * vals[i] + vals[i - 1]) / (h * h);
      if (d2 < r.min_second_difference) {
        r.min_second_difference = d2;
        r.trajectory = k;
        r.node = i;
        r.point = tr.states[i].base;
      }
    }
  }
  r.convex = r.min_second_difference >= -tol;
  r.strictly_convex = r.min_second_difference > tol;
  return r;
}

}  // namespace geolab
