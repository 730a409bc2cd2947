#pragma once

// Scalar fields on flat semi-Euclidean domains and the geometry of their graphs.
//
// The graph Gamma(u) of u : E^n_1 -> R lives in E^n_1 x R = E^{n+1}_1 where the
// extra R factor is spacelike. Ambient coordinates are ordered
// (spatial coords of the domain, graph height y, time coord(s)) so the ambient
// space keeps the positives-first convention.

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "geolab/errors.hpp"
#include "geolab/semispace.hpp"

namespace geolab {

/// Smooth function with analytic first and second derivatives. The three
/// callbacks must be pure so that a field can be evaluated concurrently.
struct ScalarField {
  std::string name;
  SemiSpace domain;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> diff;  // coordinate differential du
  std::function<Mat(const Vec&)> hess;  // matrix of second partials

  int dim() const noexcept { return domain.dim(); }
};

/// Smooth map of the real line with two derivatives; used for reparametrizations.
struct ScalarMap {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
};

// ---------------------------------------------------------------------------
// Catalog

/// u = sqrt(|p|^2_euclid + 1). On E^2_1 this is the appendix surface
/// x^2 = sqrt((x^1)^2 + t^2 + 1).
inline ScalarField hyperboloid_field(int domain_dim = 2) {
  SemiSpace dom = SemiSpace::minkowski(domain_dim - 1);
  ScalarField u{"hyperboloid", dom, {}, {}, {}};
  u.value = [](const Vec& p) { return std::sqrt(p.squaredNorm() + 1.0); };
  u.diff = [](const Vec& p) -> Vec { return p / std::sqrt(p.squaredNorm() + 1.0); };
  u.hess = [](const Vec& p) -> Mat {
    const double r2 = p.squaredNorm() + 1.0;
    const double r = std::sqrt(r2);
    return (Mat::Identity(p.size(), p.size()) * r2 - p * p.transpose()) / (r2 * r);
  };
  return u;
}

/// u = c |p|^2_euclid. Lorentzian only where 1 + 4c^2(|x|^2 - t^2) > 0.
inline ScalarField paraboloid_field(int domain_dim = 2, double c = 0.5) {
  SemiSpace dom = SemiSpace::minkowski(domain_dim - 1);
  ScalarField u{"paraboloid", dom, {}, {}, {}};
  u.value = [c](const Vec& p) { return c * p.squaredNorm(); };
  u.diff = [c](const Vec& p) -> Vec { return 2.0 * c * p; };
  u.hess = [c](const Vec& p) -> Mat { return 2.0 * c * Mat::Identity(p.size(), p.size()); };
  return u;
}

/// u = <coeffs, p>_euclid + offset.
inline ScalarField linear_field(Vec coeffs, double offset = 0.0) {
  SemiSpace dom = SemiSpace::minkowski(static_cast<int>(coeffs.size()) - 1);
  ScalarField u{"linear", dom, {}, {}, {}};
  u.value = [coeffs, offset](const Vec& p) { return coeffs.dot(p) + offset; };
  u.diff = [coeffs](const Vec&) -> Vec { return coeffs; };
  u.hess = [n = coeffs.size()](const Vec&) -> Mat { return Mat::Zero(n, n); };
  return u;
}

/// sigma o f with chain-rule derivatives.
inline ScalarField compose(const ScalarMap& sigma, const ScalarField& f) {
  ScalarField u{sigma.name + "(" + f.name + ")", f.domain, {}, {}, {}};
  u.value = [sigma, f](const Vec& p) { return sigma.value(f.value(p)); };
  u.diff = [sigma, f](const Vec& p) -> Vec { return sigma.d1(f.value(p)) * f.diff(p); };
  u.hess = [sigma, f](const Vec& p) -> Mat {
    const double s = f.value(p);
    const Vec g = f.diff(p);
    return sigma.d2(s) * g * g.transpose() + sigma.d1(s) * f.hess(p);
  };
  return u;
}

// ---------------------------------------------------------------------------
// Lorentzian quantities

/// Metric gradient: du raised with the domain metric, so <grad u, x> = du(x).
inline Vec lorentz_gradient(const ScalarField& u, const Vec& p) {
  u.domain.require(p);
  return raise(u.domain, u.diff(p));
}

/// 1 + <grad u, grad u>. Positive exactly where the graph is timelike.
inline double margin(const ScalarField& u, const Vec& p) {
  const Vec g = lorentz_gradient(u, p);
  return 1.0 + inner(u.domain, g, g);
}

inline double checked_margin(const ScalarField& u, const Vec& p) {
  const double m = margin(u, p);
  if (!(m > 0.0))
    throw NonTimelikePoint("graph of " + u.name + " is not timelike here (margin " +
                               std::to_string(m) + ")",
                           std::vector<double>(p.data(), p.data() + p.size()));
  return m;
}

/// Hessian of the lift f(p, u(p)) = u(p) on Gamma(u), evaluated on the lifts
/// of the domain vectors x, y.
inline double lifted_hessian(const ScalarField& u, const Vec& p, const Vec& x, const Vec& y) {
  const double m = checked_margin(u, p);
  return x.dot(u.hess(p) * y) / m;
}

enum class PlaneType { spacelike, timelike, degenerate };

struct CurvatureSample {
  double R = 0.0;             // R(x,y,x,y) on the lifted plane
  double discriminant = 0.0;  // <x,x><y,y> - <x,y>^2 of the lifted vectors
  PlaneType plane = PlaneType::degenerate;

  /// Sectional curvature R / discriminant (meaningless for degenerate planes).
  double sectional() const { return R / discriminant; }
};

// ---------------------------------------------------------------------------
// Graph surface

/// Gamma(u) inside E^{n+1}_1.
struct GraphSurface {
  ScalarField u;

  SemiSpace ambient() const { return SemiSpace(u.domain.positives() + 1, u.domain.negatives()); }
  int height_slot() const { return u.domain.positives(); }

  /// Inserts `height` into the graph slot of a domain vector.
  Vec embed_vector(const Vec& x, double height) const {
    const int n = u.domain.positives();
    Vec out(x.size() + 1);
    out.head(n) = x.head(n);
    out(n) = height;
    out.tail(u.domain.negatives()) = x.tail(u.domain.negatives());
    return out;
  }

  Vec embed(const Vec& p) const { return embed_vector(p, u.value(p)); }

  /// Tangent vector of Gamma(u) over the domain vector x.
  Vec lift(const Vec& p, const Vec& x) const { return embed_vector(x, u.diff(p).dot(x)); }

  Vec project(const Vec& z) const {
    const int n = u.domain.positives();
    Vec out(z.size() - 1);
    out.head(n) = z.head(n);
    out.tail(u.domain.negatives()) = z.tail(u.domain.negatives());
    return out;
  }

  /// Normal of the supporting halfspace {<z - embed(p), w> >= 0} containing the
  /// epigraph of u: w = e_height - grad u. Its inner square is margin(u, p).
  Vec inward_normal(const Vec& p) const {
    Vec w = -embed_vector(lorentz_gradient(u, p), 0.0);
    w(height_slot()) = 1.0;
    return w;
  }

  /// Inner product of two domain vectors after lifting to Gamma(u).
  double induced_inner(const Vec& p, const Vec& x, const Vec& y) const {
    const Vec du = u.diff(p);
    return inner(u.domain, x, y) + du.dot(x) * du.dot(y);
  }
};

/// R(x,y,x,y) of Gamma(u) from the second fundamental form of the graph, with
/// the causal type of the lifted plane span{x, y}.
inline CurvatureSample graph_curvature(const ScalarField& u, const Vec& p, const Vec& x,
                                       const Vec& y) {
  const double m = checked_margin(u, p);
  const Mat H = u.hess(p);
  const double hxx = x.dot(H * x);
  const double hyy = y.dot(H * y);
  const double hxy = x.dot(H * y);

  const GraphSurface graph{u};
  const double gxx = graph.induced_inner(p, x, x);
  const double gyy = graph.induced_inner(p, y, y);
  const double gxy = graph.induced_inner(p, x, y);

  CurvatureSample out;
  out.R = (hxx * hyy - hxy * hxy) / m;
  out.discriminant = gxx * gyy - gxy * gxy;

  const Vec lx = graph.lift(p, x);
  const Vec ly = graph.lift(p, y);
  const double band = 1e-9 * std::max(1.0, lx.squaredNorm() * ly.squaredNorm());
  if (std::abs(out.discriminant) <= band)
    throw DegeneratePlane("lifted plane is degenerate (discriminant " +
                          std::to_string(out.discriminant) + ")");
  out.plane = out.discriminant > 0.0 ? PlaneType::spacelike : PlaneType::timelike;
  return out;
}

// ---------------------------------------------------------------------------
// Validation oracle

struct DerivativeCheck {
  double diff_rel_error = 0.0;
  double hess_rel_error = 0.0;
  double symmetry_error = 0.0;
};

/// Compares the analytic derivatives of u against central differences of its
/// value (gradient) and of its differential (Hessian) at step h.
inline DerivativeCheck derivative_consistency(const ScalarField& u, const Vec& p, double h = 1e-5) {
  const int n = u.dim();
  Vec fd_grad(n);
  Mat fd_hess(n, n);
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e(i) = h;
    fd_grad(i) = (u.value(p + e) - u.value(p - e)) / (2.0 * h);
    fd_hess.col(i) = (u.diff(p + e) - u.diff(p - e)) / (2.0 * h);
  }
  const Vec g = u.diff(p);
  const Mat H = u.hess(p);
  DerivativeCheck out;
  out.diff_rel_error = (fd_grad - g).norm() / std::max(1.0, g.norm());
  out.hess_rel_error = (fd_hess - H).norm() / std::max(1.0, H.norm());
  out.symmetry_error = (H - H.transpose()).norm();
  return out;
}

}  // namespace geolab
