#pragma once

// Polyhedral cones in E^{n+k}_k under the indefinite pairing, their duals,
// the exact light cones, and recession/normal cones of sampled convex
// hypersurfaces.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "geolab/double_description.hpp"
#include "geolab/errors.hpp"
#include "geolab/fields.hpp"
#include "geolab/lp.hpp"
#include "geolab/semispace.hpp"

namespace geolab {

inline constexpr int max_cone_dimension = 6;

/// Finitely generated cone and/or intersection of halfspaces {x : <w, x> >= 0}.
/// An absent representation is std::nullopt; an empty generator list is {0}.
struct PolyCone {
  SemiSpace space;
  std::optional<std::vector<Vec>> generators;
  std::optional<std::vector<Vec>> halfspaces;

  static PolyCone from_generators(SemiSpace s, std::vector<Vec> g) { return {s, std::move(g), std::nullopt}; }
  static PolyCone from_halfspaces(SemiSpace s, std::vector<Vec> h) { return {s, std::nullopt, std::move(h)}; }
};

namespace detail {

inline std::vector<Vec> unit_dedup(const std::vector<Vec>& vs, double tol = 1e-12) {
  std::vector<Vec> out;
  for (const Vec& v : vs) {
    const double n = v.norm();
    if (n == 0.0) continue;
    const Vec u = v / n;
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Vec& w) { return (w - u).norm() <= tol; });
    if (!seen) out.push_back(u);
  }
  return out;
}

inline std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

inline Vec from_std(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

/// Checks a floating conversion: every ray feasible and extreme, every line tight.
inline bool verify_rays(const std::vector<std::vector<double>>& rows, const dd::Cone<double>& c, int d) {
  const double tol = 1e-9;
  const int needed = d - static_cast<int>(c.lines.size()) - 1;
  for (const auto& r : c.rays) {
    const Vec rv = from_std(r);
    std::vector<std::vector<double>> tight;
    for (const auto& a : rows) {
      const double s = from_std(a).dot(rv) / (from_std(a).norm() * rv.norm());
      if (s < -tol) return false;
      if (std::abs(s) <= tol) tight.push_back(a);
    }
    if (dd::detail::rank_of(tight, tol) != needed) return false;
  }
  for (const auto& l : c.lines)
    for (const auto& a : rows)
      if (std::abs(from_std(a).dot(from_std(l))) > tol * from_std(a).norm() * from_std(l).norm()) return false;
  return true;
}

}  // namespace detail

/// Generators of {x : <v_i, x> >= 0 for all i}: extreme rays plus both
/// directions of each lineality vector, at unit Euclidean length.
inline std::vector<Vec> polar_generators(const SemiSpace& space, const std::vector<Vec>& vs) {
  const int d = space.dim();
  if (d > max_cone_dimension)
    throw DimensionTooLarge("cone conversion is capped at dimension " + std::to_string(max_cone_dimension));
  std::vector<std::vector<double>> rows;
  for (const Vec& v : detail::unit_dedup(vs)) rows.push_back(detail::to_std(euclid_flip(space, v)));

  dd::Cone<double> c = dd::double_description<double>(rows, d);
  if (!detail::verify_rays(rows, c, d) && d <= 4) {
    const dd::Cone<dd::Rational> q = dd::double_description_exact(rows, d);
    c = {};
    auto conv = [](const std::vector<dd::Rational>& v) {
      std::vector<double> out;
      for (const auto& x : v) out.push_back(static_cast<double>(x));
      return out;
    };
    for (const auto& r : q.rays) c.rays.push_back(conv(r));
    for (const auto& l : q.lines) c.lines.push_back(conv(l));
  }
  std::vector<Vec> out;
  for (const auto& r : c.rays) out.push_back(detail::from_std(r));
  for (const auto& l : c.lines) {
    out.push_back(detail::from_std(l));
    out.push_back(-detail::from_std(l));
  }
  return detail::unit_dedup(out, 1e-9);
}

inline std::vector<Vec> generators_of(const PolyCone& K) {
  if (K.generators) return *K.generators;
  if (!K.halfspaces) return {};
  return polar_generators(K.space, *K.halfspaces);
}

inline std::vector<Vec> halfspaces_of(const PolyCone& K) {
  if (K.halfspaces) return *K.halfspaces;
  if (!K.generators) return {};
  return polar_generators(K.space, *K.generators);
}

/// K* = {w : <w, x> >= 0 for all x in K}, in both representations.
inline PolyCone dual_cone(const PolyCone& K) {
  PolyCone D{K.space, std::nullopt, std::nullopt};
  if (K.generators) {
    D.halfspaces = *K.generators;
    D.generators = polar_generators(K.space, *K.generators);
  } else if (K.halfspaces) {
    D.generators = *K.halfspaces;
    D.halfspaces = polar_generators(K.space, *K.halfspaces);
  } else {
    D.generators = std::vector<Vec>{};
  }
  return D;
}

/// Membership through halfspaces: <w, x> >= -tol |w| |x| for every w.
inline bool contains_by_halfspaces(const SemiSpace& space, const std::vector<Vec>& hs, const Vec& x, double tol = 1e-9) {
  space.require(x);
  return std::all_of(hs.begin(), hs.end(), [&](const Vec& w) {
    return inner(space, w, x) >= -tol * w.norm() * std::max(1.0, x.norm());
  });
}

/// Membership through generators: the l1 distance from x to cone(G) found by LP
/// is at most tol * max(1, |x|).
inline bool contains_by_generators(const SemiSpace& space, const std::vector<Vec>& gens, const Vec& x, double tol = 1e-9) {
  space.require(x);
  const int d = space.dim();
  const std::vector<Vec> G = detail::unit_dedup(gens);
  const int m = static_cast<int>(G.size());
  // variables: lambda (m), s_plus (d), s_minus (d)
  lp::Problem p(m + 2 * d);
  p.objective.tail(2 * d).setOnes();
  for (int i = 0; i < d; ++i) {
    Vec row = Vec::Zero(m + 2 * d);
    for (int j = 0; j < m; ++j) row(j) = G[j](i);
    row(m + i) = 1.0;
    row(m + d + i) = -1.0;
    p.add_row(row, lp::Sense::eq, x(i));
  }
  const lp::Solution s = lp::solve(p);
  return s.optimal() && s.value <= tol * std::max(1.0, x.norm());
}

inline bool contains(const PolyCone& K, const Vec& x, double tol = 1e-9) {
  if (K.halfspaces) return contains_by_halfspaces(K.space, *K.halfspaces, x, tol);
  if (K.generators) return contains_by_generators(K.space, *K.generators, x, tol);
  return true;
}

struct ConePredicates {
  bool pointed = true;
  bool contains_line = false;
  bool has_interior = false;
};

inline ConePredicates cone_predicates(const PolyCone& K) {
  const std::vector<Vec> G = detail::unit_dedup(generators_of(K));
  const int d = K.space.dim();
  ConePredicates out;
  if (!G.empty()) {
    Mat M(d, static_cast<Eigen::Index>(G.size()));
    for (std::size_t j = 0; j < G.size(); ++j) M.col(static_cast<Eigen::Index>(j)) = G[j];
    Eigen::FullPivLU<Mat> lu(M);
    lu.setThreshold(1e-9);
    out.has_interior = lu.rank() == d;
    // A line exists iff some nonzero nonnegative combination vanishes.
    const int m = static_cast<int>(G.size());
    lp::Problem p(m);
    for (int i = 0; i < d; ++i) p.add_row(M.row(i).transpose(), lp::Sense::eq, 0.0);
    p.add_row(Vec::Ones(m), lp::Sense::eq, 1.0);
    out.contains_line = lp::solve(p).optimal();
    out.pointed = !out.contains_line;
  }
  return out;
}

/// x* in K* with <x, x*> = 0 when x lies on the boundary of K; nullopt when x
/// is interior (every generator of K* pairs with x above the tolerance).
inline std::optional<Vec> boundary_witness(const PolyCone& K, const Vec& x, double tol = 1e-9) {
  if (!contains(K, x, tol)) throw NotInCone("point is not in the cone", detail::to_std(x));
  const PolyCone D = dual_cone(K);
  std::optional<Vec> best;
  double lowest = tol * std::max(1.0, x.norm());
  for (const Vec& g : *D.generators) {
    const double s = inner(K.space, x, g) / g.norm();
    if (s <= lowest) {
      lowest = s;
      best = g / g.norm();
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Light cones

/// The future (or past) causal cone of Minkowski space, handled exactly.
struct LightCone {
  SemiSpace space;
  bool future = true;

  LightCone(SemiSpace s, bool fut) : space(s), future(fut) {
    if (s.negatives() != 1) throw DimensionMismatch("light cones need signature (n, 1)");
  }

  int spatial() const { return space.positives(); }
  double time_sign() const { return future ? 1.0 : -1.0; }

  bool contains(const Vec& x, double tol = 1e-12) const {
    space.require(x);
    return time_sign() * x(spatial()) >= x.head(spatial()).norm() - tol * std::max(1.0, x.norm());
  }

  /// The future and past cones are dual to each other.
  LightCone dual() const { return {space, !future}; }

  /// Minimizer of <w, x> over the slice of the cone with |time| = 1; the cone
  /// lies in the dual of w exactly when the minimum is >= 0.
  Vec slice_minimizer(const Vec& w) const {
    space.require(w);
    const int n = spatial();
    Vec x(n + 1);
    const double ws = w.head(n).norm();
    if (ws > 0.0)
      x.head(n) = -w.head(n) / ws;
    else
      x.head(n) = Vec::Unit(n, 0);
    x(n) = time_sign();
    return x;
  }

  double slice_minimum(const Vec& w) const { return inner(space, w, slice_minimizer(w)); }

  /// Null x on the boundary pairs to zero with -x in the dual cone.
  std::optional<Vec> boundary_witness(const Vec& x, double tol = 1e-9) const {
    if (!contains(x, tol)) throw NotInCone("point is not in the light cone", detail::to_std(x));
    if (x.isZero(0.0)) return -time_sign() * Vec::Unit(space.dim(), spatial());
    if (std::abs(inner_square(space, x)) > tol * std::max(1.0, x.squaredNorm())) return std::nullopt;
    return Vec(-x / x.norm());
  }
};

/// Unit directions of the (spatial-1)-sphere used for polyhedral light cones:
/// exact for one spatial dimension, m equally spaced angles for two, a
/// Fibonacci lattice of m points for three, and the cross-polytope plus cube
/// corners beyond.
inline std::vector<Vec> sphere_directions(int spatial, int m) {
  std::vector<Vec> dirs;
  if (spatial == 1) {
    dirs = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  } else if (spatial == 2) {
    for (int i = 0; i < m; ++i) {
      const double a = 2.0 * std::numbers::pi * i / m;
      Vec v(2);
      v << std::cos(a), std::sin(a);
      dirs.push_back(v);
    }
  } else if (spatial == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < m; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / m;
      const double r = std::sqrt(1.0 - z * z);
      Vec v(3);
      v << r * std::cos(golden * i), r * std::sin(golden * i), z;
      dirs.push_back(v);
    }
  } else {
    for (int i = 0; i < spatial; ++i) {
      dirs.push_back(Vec::Unit(spatial, i));
      dirs.push_back(-Vec::Unit(spatial, i));
    }
    for (int mask = 0; mask < (1 << spatial); ++mask) {
      Vec v(spatial);
      for (int i = 0; i < spatial; ++i) v(i) = (mask >> i) & 1 ? 1.0 : -1.0;
      dirs.push_back(v / std::sqrt(static_cast<double>(spatial)));
    }
  }
  return dirs;
}

/// Inscribed polyhedral approximation of a light cone: generators (s, +-1)
/// for the sphere directions s.
inline PolyCone light_cone_polytope(const LightCone& L, int m = 64) {
  std::vector<Vec> gens;
  for (const Vec& s : sphere_directions(L.spatial(), m)) {
    Vec g(L.space.dim());
    g << s, L.time_sign();
    gens.push_back(g / g.norm());
  }
  return PolyCone::from_generators(L.space, std::move(gens));
}

// ---------------------------------------------------------------------------
// Null pairs in a dual cone

struct NullPair {
  Vec future;  // u in the future cone, null, in K*
  Vec past;    // u' in the past cone, null, in K*
};

namespace detail {

/// w in K* with time component `time` and |spatial part| <= 1, found by LP with
/// cutting planes for the ball constraint. Maximizes the summed pairing with K.
inline std::optional<Vec> causal_dual_point(const SemiSpace& space, const std::vector<Vec>& gens, double time) {
  const int n = space.positives();
  const int d = space.dim();
  lp::Problem p(d);
  for (int i = 0; i < n; ++i) p.bounds(i, -1.0, 1.0);
  p.bounds(n, time, time);
  p.maximize = true;
  for (const Vec& g : gens) {
    const Vec row = euclid_flip(space, g / g.norm());
    p.add_row(row, lp::Sense::ge, 0.0);
    p.objective += row;
  }
  for (int round = 0; round < 500; ++round) {
    const lp::Solution s = lp::solve(p);
    if (!s.optimal()) return std::nullopt;
    const double r = s.x.head(n).norm();
    if (r <= 1.0 + 1e-12) return s.x;
    Vec cut = Vec::Zero(d);
    cut.head(n) = s.x.head(n) / r;
    p.add_row(cut, lp::Sense::le, 1.0);
  }
  return std::nullopt;
}

}  // namespace detail

/// Two linearly independent null vectors u (future) and u' (past) in K* for a
/// full-dimensional cone K of spacelike vectors, from the segment joining a
/// future and a past point of K*.
inline NullPair null_pair_in_dual(const PolyCone& K) {
  const SemiSpace& space = K.space;
  if (space.negatives() != 1) throw DimensionMismatch("null pairs need Minkowski signature");
  const std::vector<Vec> G = detail::unit_dedup(generators_of(K));
  for (const Vec& g : G)
    if (causal_character(space, g) != Causal::spacelike)
      throw std::invalid_argument("null_pair_in_dual: generators must be spacelike");
  if (!cone_predicates(K).has_interior) throw ConeDegenerate("cone lies in a proper subspace");

  const auto w = detail::causal_dual_point(space, G, 1.0);
  const auto w2 = detail::causal_dual_point(space, G, -1.0);
  if (!w || !w2) throw ConeDegenerate("dual cone misses the future or past cone");

  // q(l) = <w + l d, w + l d> is <= 0 at both ends and > 0 where the time part vanishes.
  const Vec dir = *w2 - *w;
  const double a = inner(space, dir, dir);
  const double b = 2.0 * inner(space, *w, dir);
  const double c = inner(space, *w, *w);
  const double disc = b * b - 4.0 * a * c;
  if (!(a < 0.0) || disc < 0.0) throw ConeDegenerate("segment between causal dual points stays causal");
  const double sq = std::sqrt(disc);
  // roots of a l^2 + b l + c with a < 0, in increasing order, computed stably
  const double qv = -0.5 * (b + std::copysign(sq, b));
  double r1 = qv / a, r2 = qv != 0.0 ? c / qv : 0.0;
  if (r1 > r2) std::swap(r1, r2);
  NullPair out{*w + std::clamp(r1, 0.0, 1.0) * dir, *w + std::clamp(r2, 0.0, 1.0) * dir};
  out.future /= out.future.norm();
  out.past /= out.past.norm();

  Mat pair(space.dim(), 2);
  pair << out.future, out.past;
  Eigen::JacobiSVD<Mat> svd(pair);
  if (svd.singularValues()(1) <= 1e-9) throw ConeDegenerate("null vectors are dependent");
  return out;
}

// ---------------------------------------------------------------------------
// Recession and normal cones

struct RecessionNormal {
  PolyCone normal;     // N_hat: cone of sampled inward normals
  PolyCone recession;  // R_hat = N_hat*
};

/// Both cones from a sample of inward normals of a convex hypersurface.
/// N_hat keeps only the extreme sampled normals, recovered as the dual of R_hat.
inline RecessionNormal recession_normal(const SemiSpace& space, const std::vector<Vec>& inward_normals) {
  const PolyCone sampled = PolyCone::from_generators(space, detail::unit_dedup(inward_normals, 1e-10));
  PolyCone R = dual_cone(sampled);
  PolyCone N = dual_cone(PolyCone::from_generators(space, *R.generators));
  if (R.generators->empty()) N.generators = sampled.generators;
  R.halfspaces = N.generators;
  return {std::move(N), std::move(R)};
}

/// Inward normals of Gamma(u) at a grid of `per_axis`^dim points of the box [-radius, radius]^dim.
inline std::vector<Vec> graph_normals(const ScalarField& u, double radius, int per_axis) {
  const GraphSurface g{u};
  const int n = u.dim();
  std::vector<Vec> out;
  std::vector<int> idx(n, 0);
  for (;;) {
    Vec p(n);
    for (int i = 0; i < n; ++i) p(i) = -radius + 2.0 * radius * idx[i] / std::max(1, per_axis - 1);
    out.push_back(g.inward_normal(p));
    int i = 0;
    while (i < n && ++idx[i] == per_axis) idx[i++] = 0;
    if (i == n) break;
  }
  return out;
}

inline RecessionNormal recession_normal(const ScalarField& u, double radius = 20.0, int per_axis = 41) {
  return recession_normal(GraphSurface{u}.ambient(), graph_normals(u, radius, per_axis));
}

/// Inward normals (1, -x^2) of the body {x t >= 1, x > 0} in E^2_1 at
/// x = exp(k * step), k = -half..half.
inline std::vector<Vec> hyperbola_body_normals(int half = 20, double step = 0.15) {
  std::vector<Vec> out;
  for (int k = -half; k <= half; ++k) {
    const double x = std::exp(step * k);
    out.push_back((Vec(2) << 1.0, -x * x).finished());
  }
  return out;
}

/// Inward normals of {p + (sqrt(1 + t^2), 0, t) : p in C, |t| <= extent} in E^3_1,
/// where C is the plane curve made of the rays x1 >= 1, x2 = +-1 joined by the
/// half circle of radius 1 about (1, 0) in 0 <= x1 <= 1.
inline std::vector<Vec> capped_cylinder_normals(int per_piece = 21, double extent = 3.0) {
  std::vector<Vec> planar;
  for (int i = 0; i < per_piece; ++i) {
    const double phi = std::numbers::pi * (0.5 + static_cast<double>(i) / std::max(1, per_piece - 1));
    planar.push_back((Vec(2) << -std::cos(phi), -std::sin(phi)).finished());
  }
  planar.push_back((Vec(2) << 0.0, -1.0).finished());
  planar.push_back((Vec(2) << 0.0, 1.0).finished());
  std::vector<Vec> out;
  for (const Vec& N : planar)
    for (int j = 0; j < per_piece; ++j) {
      const double t = -extent + 2.0 * extent * j / std::max(1, per_piece - 1);
      out.push_back((Vec(3) << N(0), N(1), N(0) * t / std::sqrt(1.0 + t * t)).finished());
    }
  return out;
}

struct V0Search {
  bool found = false;
  Vec v0;           // unit vector in int N_hat and R_hat when found
  double depth = 0;  // interior margin reached by the LP
  Vec certificate;  // when empty: <w, n> <= 0 on N_hat, <w, r> >= 0 on R_hat
};

/// Searches for v0 in (int N_hat) and R_hat.
inline V0Search find_v0(const RecessionNormal& cones, double tol = 1e-9) {
  const SemiSpace& space = cones.normal.space;
  const int d = space.dim();
  const std::vector<Vec> Nface = detail::unit_dedup(halfspaces_of(cones.normal));
  const std::vector<Vec> Rface = detail::unit_dedup(halfspaces_of(cones.recession));
  V0Search out;

  // The last LP variable is the margin being maximized: first on the facets
  // of N_hat (interior depth), then on the facets of R_hat while half of the
  // interior depth is held.
  auto search = [&](bool centre, double hold) {
    lp::Problem p(d + 1);
    for (int i = 0; i < d; ++i) p.bounds(i, -1.0, 1.0);
    p.bounds(d, centre ? 0.0 : -lp::inf, 1.0);
    p.maximize = true;
    p.objective(d) = 1.0;
    for (const Vec& h : Nface) {
      Vec row(d + 1);
      row << euclid_flip(space, h), centre ? 0.0 : -1.0;
      p.add_row(row, lp::Sense::ge, hold);
    }
    for (const Vec& h : Rface) {
      Vec row(d + 1);
      row << euclid_flip(space, h), centre ? -1.0 : 0.0;
      p.add_row(row, lp::Sense::ge, 0.0);
    }
    return lp::solve(p);
  };

  const lp::Solution first = search(false, 0.0);
  if (first.optimal() && first.x(d) > tol) {
    out.depth = first.x(d);
    const lp::Solution second = search(true, 0.5 * out.depth);
    const Vec v = (second.optimal() ? second.x : first.x).head(d);
    out.found = true;
    out.v0 = v / v.norm();
    return out;
  }

  // Separating certificate: <w, n> <= 0 on N_hat and <w, r> >= 0 on R_hat.
  lp::Problem p(d);
  for (int i = 0; i < d; ++i) p.bounds(i, -1.0, 1.0);
  p.maximize = true;
  for (const Vec& n : detail::unit_dedup(generators_of(cones.normal))) {
    const Vec row = euclid_flip(space, n);
    p.add_row(row, lp::Sense::le, 0.0);
    p.objective -= row;
  }
  for (const Vec& r : detail::unit_dedup(generators_of(cones.recession))) {
    const Vec row = euclid_flip(space, r);
    p.add_row(row, lp::Sense::ge, 0.0);
    p.objective += row;
  }
  const lp::Solution cert = lp::solve(p);
  if (cert.optimal() && cert.x.norm() > tol) out.certificate = cert.x / cert.x.norm();
  return out;
}

/// The height function p -> <embed(p), v> of Gamma(u), as a field on the domain.
inline ScalarField height_function(const ScalarField& u, const Vec& v) {
  const GraphSurface g{u};
  const SemiSpace amb = g.ambient();
  amb.require(v);
  const Vec fv = euclid_flip(amb, v);
  const int slot = g.height_slot();
  ScalarField h{"height", u.domain, {}, {}, {}};
  h.value = [g, fv](const Vec& p) { return fv.dot(g.embed(p)); };
  h.diff = [g, fv, slot](const Vec& p) -> Vec {
    Vec out = g.project(fv);
    out += fv(slot) * g.u.diff(p);
    return out;
  };
  h.hess = [g, fv, slot](const Vec& p) -> Mat { return fv(slot) * g.u.hess(p); };
  return h;
}

}  // namespace geolab
