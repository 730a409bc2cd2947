#pragma once

// Geodesics of graph hypersurfaces Gamma(u) in E^{n+1}_1.
//
// A geodesic gamma = (alpha, u o alpha) is integrated through its domain
// projection alpha, which satisfies
//   alpha'' = -[Hess u(alpha', alpha') / (1 + <grad u, grad u>)] grad u.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

#include "geolab/errors.hpp"
#include "geolab/fields.hpp"
#include "geolab/ode.hpp"

namespace geolab {

struct GeodesicState {
  Vec base;  // alpha(t)
  Vec vel;   // alpha'(t)
};

struct Trajectory {
  std::vector<double> params;
  std::vector<GeodesicState> states;
  double speed0 = 0.0;     // <gamma'(0), gamma'(0)> on Gamma(u)
  double max_drift = 0.0;  // max |<gamma', gamma'> - speed0| over the nodes

  std::size_t size() const noexcept { return params.size(); }
  const GeodesicState& back() const { return states.back(); }
};

/// Squared speed <gamma', gamma'> of the lifted velocity.
inline double graph_speed(const ScalarField& u, const GeodesicState& s) {
  return GraphSurface{u}.induced_inner(s.base, s.vel, s.vel);
}

inline Vec geodesic_rhs(const ScalarField& u, const GeodesicState& s) {
  const Vec grad = lorentz_gradient(u, s.base);
  const double m = 1.0 + inner(u.domain, grad, grad);
  if (!(m > 0.0))
    throw NonTimelikePoint("geodesic left the timelike part of the graph",
                           std::vector<double>(s.base.data(), s.base.data() + s.base.size()));
  const double second = s.vel.dot(u.hess(s.base) * s.vel) / m;  // (u o alpha)''
  return -second * grad;
}

namespace detail {

inline ode::State pack(const GeodesicState& s) {
  const auto n = s.base.size();
  ode::State x(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = s.base(i);
    x[n + i] = s.vel(i);
  }
  return x;
}

inline GeodesicState unpack(const ode::State& x) {
  const auto n = static_cast<Eigen::Index>(x.size() / 2);
  GeodesicState s{Vec(n), Vec(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    s.base(i) = x[i];
    s.vel(i) = x[n + i];
  }
  return s;
}

inline ode::System geodesic_system(const ScalarField& u) {
  return [u](const ode::State& x, ode::State& dxdt, double) {
    const GeodesicState s = unpack(x);
    const auto n = s.base.size();
    dxdt.resize(x.size());
    Vec acc;
    try {
      acc = geodesic_rhs(u, s);
    } catch (const NonTimelikePoint&) {
      // Outside the timelike region: poison the stage so the stepper rejects it.
      std::fill(dxdt.begin(), dxdt.end(), std::numeric_limits<double>::quiet_NaN());
      return;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      dxdt[i] = s.vel(i);
      dxdt[n + i] = acc(i);
    }
  };
}

/// Runs `body`, turning a step-size collapse next to the null boundary of the
/// timelike region into LeftTimelikeRegion. `x` is the last accepted state.
/// A positive `horizon` means x may still be some way from the collapse; it is
/// then followed adaptively for that long to find where the steps die.
template <class Body>
void at_boundary(const ScalarField& u, const ode::State& x, Body&& body, double horizon = 0.0) {
  try {
    body();
  } catch (const StepUnderflow& e) {
    ode::State y = x;
    if (horizon > 0.0) {
      ode::Stepper probe(geodesic_system(u), {});
      try {
        probe.advance(y, 0.0, horizon);
      } catch (const StepUnderflow&) {
      }
    }
    const GeodesicState s = unpack(y);
    const Vec g = lorentz_gradient(u, s.base);
    if (margin(u, s.base) <= 1e-3 * std::max(1.0, g.squaredNorm()))
      throw LeftTimelikeRegion(std::string("geodesic ran into the null boundary: ") + e.what(),
                               std::vector<double>(s.base.data(), s.base.data() + s.base.size()));
    throw;
  }
}

}  // namespace detail

struct IntegrateOptions {
  double tol = 1e-10;
  /// Number of uniformly spaced output nodes including both ends. Zero
  /// records every accepted adaptive step instead.
  std::size_t nodes = 1001;
};

/// Integrates the graph-geodesic equation on [0, t_end].
inline Trajectory integrate(const ScalarField& u, const GeodesicState& s0, double t_end,
                            const IntegrateOptions& opts = {}) {
  u.domain.require(s0.base);
  u.domain.require(s0.vel);
  if (!(t_end >= 0.0)) throw std::invalid_argument("integrate: t_end must be >= 0");
  checked_margin(u, s0.base);

  Trajectory traj;
  traj.speed0 = graph_speed(u, s0);
  auto record = [&](double t, const GeodesicState& s) {
    traj.params.push_back(t);
    traj.states.push_back(s);
    traj.max_drift = std::max(traj.max_drift, std::abs(graph_speed(u, s) - traj.speed0));
  };
  record(0.0, s0);
  if (t_end == 0.0) return traj;

  ode::State x = detail::pack(s0);
  double t = 0.0;
  detail::at_boundary(u, x, [&] {
    if (opts.nodes == 0) {
      ode::Stepper stepper(detail::geodesic_system(u), {.tol = opts.tol});
      while (t < t_end) {
        t = stepper.step(x, t, t_end);
        record(t, detail::unpack(x));
      }
      traj.params.back() = t_end;
    } else {
      ode::GridStepper stepper(detail::geodesic_system(u), {.tol = opts.tol});
      const std::size_t intervals = std::max<std::size_t>(opts.nodes, 2) - 1;
      const double h = t_end / static_cast<double>(intervals);
      for (std::size_t i = 1; i <= intervals; ++i) {
        stepper.advance(x, static_cast<double>(i - 1) * h, h);
        record(static_cast<double>(i) * h, detail::unpack(x));
      }
    }
  }, opts.nodes == 0 ? 0.0 : t_end / static_cast<double>(std::max<std::size_t>(opts.nodes, 2) - 1));
  return traj;
}

/// Sup-norm defect between a fourth-order central second difference of the
/// base curve and geodesic_rhs on a uniform trajectory.
inline double geodesic_defect(const ScalarField& u, const Trajectory& traj) {
  const std::size_t n = traj.size();
  if (n < 5) return 0.0;
  const double h = traj.params[1] - traj.params[0];
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const Vec& a = traj.states[i - 2].base;
    const Vec& b = traj.states[i - 1].base;
    const Vec& c = traj.states[i].base;
    const Vec& d = traj.states[i + 1].base;
    const Vec& e = traj.states[i + 2].base;
    const Vec fd = (-a + 16.0 * b - 30.0 * c + 16.0 * d - e) / (12.0 * h * h);
    worst = std::max(worst, (fd - geodesic_rhs(u, traj.states[i])).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Boundary-value shooting

struct ConnectOptions {
  double residual_tol = 1e-6;
  std::size_t max_restarts = 32;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  std::size_t nodes = 1001;
  /// The output grid is refined (up to max_nodes) until the finite-difference
  /// defect of the returned curve is at most defect_tol.
  double defect_tol = 1e-6;
  std::size_t max_nodes = 16001;
  std::size_t newton_iterations = 40;
  double noise = 0.5;  // restart perturbation, relative to 1 + |q - p|
  unsigned jobs = 1;   // concurrent restarts
};

struct ConnectResult {
  Trajectory trajectory;
  Vec initial_velocity;
  double residual = 0.0;
  double defect = 0.0;      // geodesic_defect of the trajectory
  std::size_t attempt = 0;  // 0 is the chord start
};

namespace detail {

inline Vec shoot(const ScalarField& u, const Vec& p, const Vec& v, double tol) {
  ode::Stepper stepper(geodesic_system(u), {.tol = tol});
  ode::State x = pack({p, v});
  at_boundary(u, x, [&] { stepper.advance(x, 0.0, 1.0); });
  return unpack(x).base;
}

struct ShotOutcome {
  bool ok = false;
  Vec velocity;
  double residual = std::numeric_limits<double>::infinity();
};

/// Damped Newton on the endpoint map v -> alpha(1) with a central-difference Jacobian.
inline ShotOutcome newton_shoot(const ScalarField& u, const Vec& p, const Vec& q, Vec v,
                                const ConnectOptions& opts) {
  ShotOutcome out;
  const auto n = p.size();
  auto residual_of = [&](const Vec& vel) -> std::optional<Vec> {
    try {
      return shoot(u, p, vel, opts.tol) - q;
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  std::optional<Vec> r = residual_of(v);
  if (!r) return out;
  const double target = 1e-3 * opts.residual_tol;
  for (std::size_t it = 0; it < opts.newton_iterations && r->norm() > target; ++it) {
    Mat J(n, n);
    const double h = 1e-6 * std::max(1.0, v.norm());
    for (Eigen::Index j = 0; j < n; ++j) {
      Vec e = Vec::Zero(n);
      e(j) = h;
      auto rp = residual_of(v + e);
      auto rm = residual_of(v - e);
      if (!rp || !rm) return out;
      J.col(j) = (*rp - *rm) / (2.0 * h);
    }
    const Vec dv = J.fullPivLu().solve(-*r);
    if (!dv.allFinite()) break;
    double lambda = 1.0;
    bool accepted = false;
    while (lambda > 1e-6) {
      auto trial = residual_of(v + lambda * dv);
      if (trial && trial->norm() < (1.0 - 1e-4 * lambda) * r->norm()) {
        v += lambda * dv;
        r = trial;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
  }
  out.velocity = v;
  out.residual = r->norm();
  out.ok = out.residual <= opts.residual_tol;
  return out;
}

}  // namespace detail

/// Finds a geodesic of Gamma(u) from p to q with parameter interval [0, 1].
/// Starts from the chord velocity q - p, then from Gaussian perturbations of it.
/// Throws NotFound with the best residual when every attempt fails; that is not
/// a proof that no geodesic exists.
inline ConnectResult connect(const ScalarField& u, const Vec& p, const Vec& q,
                             const ConnectOptions& opts = {}) {
  u.domain.require(p);
  u.domain.require(q);
  const Vec chord = q - p;

  if (chord.norm() == 0.0) {
    ConnectResult res;
    res.trajectory = integrate(u, {p, Vec::Zero(p.size())}, 1.0, {opts.tol, opts.nodes});
    res.initial_velocity = Vec::Zero(p.size());
    return res;
  }

  auto start_for = [&](std::size_t attempt) -> Vec {
    if (attempt == 0) return chord;
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                      static_cast<std::uint32_t>(attempt)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, opts.noise * (1.0 + chord.norm()));
    Vec v = chord;
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += gauss(rng);
    return v;
  };

  auto finish = [&](const detail::ShotOutcome& shot, std::size_t attempt) -> std::optional<ConnectResult> {
    ConnectResult res;
    try {
      for (std::size_t nodes = std::max<std::size_t>(opts.nodes, 5);; nodes = 2 * nodes - 1) {
        res.trajectory = integrate(u, {p, shot.velocity}, 1.0, {opts.tol, nodes});
        res.defect = geodesic_defect(u, res.trajectory);
        if (res.defect <= opts.defect_tol || 2 * nodes - 1 > opts.max_nodes) break;
      }
    } catch (const Error&) {
      return std::nullopt;
    }
    res.initial_velocity = shot.velocity;
    res.residual = (res.trajectory.back().base - q).norm();
    res.attempt = attempt;
    if (res.residual > opts.residual_tol) return std::nullopt;
    return res;
  };

  double best = std::numeric_limits<double>::infinity();
  const std::size_t attempts = opts.max_restarts + 1;
  const std::size_t batch = std::max(1u, opts.jobs);
  for (std::size_t first = 0; first < attempts;) {
    // The chord start runs alone; restarts run in batches of `jobs`.
    const std::size_t count = first == 0 ? 1 : std::min(batch, attempts - first);
    std::vector<detail::ShotOutcome> shots(count);
    if (count == 1) {
      shots[0] = detail::newton_shoot(u, p, q, start_for(first), opts);
    } else {
      std::vector<std::future<detail::ShotOutcome>> futures;
      for (std::size_t i = 0; i < count; ++i)
        futures.push_back(std::async(std::launch::async, [&, i] {
          return detail::newton_shoot(u, p, q, start_for(first + i), opts);
        }));
      for (std::size_t i = 0; i < count; ++i) shots[i] = futures[i].get();
    }
    for (std::size_t i = 0; i < count; ++i) {
      best = std::min(best, shots[i].residual);
      if (shots[i].ok)
        if (auto res = finish(shots[i], first + i)) return *res;
    }
    first += count;
  }
  throw NotFound("no geodesic found after " + std::to_string(attempts) +
                     " attempts (best residual " + std::to_string(best) + ")",
                 {best});
}

// ---------------------------------------------------------------------------
// First exit from a sublevel set

struct ExitOptions {
  double tol = 1e-10;
  double budget = 1e3;  // parameter length at unit Euclidean speed
  double level_tol = 1e-10;
};

struct ExitResult {
  Vec point;         // alpha(t0) in the domain
  double param = 0;  // t0
  double rate = 0;   // (f o gamma)'(t0); positive certifies a transverse exit
  GeodesicState state;
};

/// First parameter at which the geodesic from s0 reaches f = a, where f is a
/// field on the domain (the lift of a field on Gamma(u)). Throws Trapped if the
/// parameter budget runs out inside the sublevel set.
inline ExitResult first_exit(const ScalarField& u, const ScalarField& f, const GeodesicState& s0,
                             double a, const ExitOptions& opts = {}) {
  if (!(f.value(s0.base) < a)) throw std::invalid_argument("first_exit: start must lie below the level");
  const double speed = s0.vel.norm();
  if (speed == 0.0) throw Trapped("zero initial velocity never leaves the sublevel set");
  const double t_max = opts.budget / speed;

  const ode::System sys = detail::geodesic_system(u);
  ode::Stepper stepper(sys, {.tol = opts.tol});
  ode::State x = detail::pack(s0);
  double t = 0.0;
  for (;;) {
    const ode::State x_prev = x;
    const double t_prev = t;
    detail::at_boundary(u, x, [&] { t = stepper.step(x, t, t_max); });
    if (f.value(detail::unpack(x).base) >= a) {
      // Bisection on the bracket, re-integrating from the last state below the level.
      double lo = t_prev, hi = t;
      ode::State x_hi = x;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        ode::State xm = x_prev;
        ode::Stepper local(sys, {.tol = opts.tol});
        if (mid > t_prev) local.advance(xm, t_prev, mid);
        const double g = f.value(detail::unpack(xm).base) - a;
        if (g >= 0.0) {
          hi = mid;
          x_hi = xm;
        } else {
          lo = mid;
        }
        if (std::abs(g) <= opts.level_tol || hi - lo <= 1e-15 * std::max(1.0, hi)) {
          x_hi = xm;
          hi = mid;
          break;
        }
      }
      ExitResult out;
      out.state = detail::unpack(x_hi);
      out.point = out.state.base;
      out.param = hi;
      out.rate = f.diff(out.point).dot(out.state.vel);
      return out;
    }
    if (t >= t_max)
      throw Trapped("geodesic stayed below level " + std::to_string(a) + " for parameter length " +
                        std::to_string(t_max),
                    std::vector<double>(s0.vel.data(), s0.vel.data() + s0.vel.size()));
  }
}

/// Winding number of theta -> psi(v(theta)) around p, for v(theta) running over
/// m uniformly spaced directions of the Euclidean unit circle of the
/// 2-dimensional domain. The exit map uses the lift of u itself.
inline int winding_degree(const ScalarField& u, const Vec& p, double a, std::size_t m,
                          const ExitOptions& opts = {}) {
  if (u.dim() != 2) throw DimensionMismatch("winding_degree needs a 2-dimensional domain");
  if (m < 3) throw InsufficientSamples("need at least 3 directions");
  std::vector<double> angles(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
    Vec v(2);
    v << std::cos(theta), std::sin(theta);
    const ExitResult ex = first_exit(u, u, {p, v}, a, opts);
    const Vec d = ex.point - p;
    angles[j] = std::atan2(d(1), d(0));
  }
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double delta = angles[(j + 1) % m] - angles[j];
    delta = std::remainder(delta, 2.0 * std::numbers::pi);
    // Neighbouring exits more than a quarter turn apart cannot be unwrapped reliably.
    if (std::abs(delta) > 0.5 * std::numbers::pi)
      throw InsufficientSamples("exit points jump by " + std::to_string(delta) +
                                " rad between neighbouring directions");
    total += delta;
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

// ---------------------------------------------------------------------------
// CSV export

/// Columns: t, domain coordinates, u, velocity coordinates, <gamma', gamma'>.
inline void write_trajectory_csv(std::ostream& os, const ScalarField& u, const Trajectory& traj) {
  const int n = u.dim();
  os << "t";
  for (int i = 0; i < n; ++i) os << ",x" << i + 1;
  os << ",u";
  for (int i = 0; i < n; ++i) os << ",dx" << i + 1;
  os << ",speed2\n";
  const auto old = os.precision(17);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const GeodesicState& s = traj.states[k];
    os << traj.params[k];
    for (int i = 0; i < n; ++i) os << ',' << s.base(i);
    os << ',' << u.value(s.base);
    for (int i = 0; i < n; ++i) os << ',' << s.vel(i);
    os << ',' << graph_speed(u, s) << '\n';
  }
  os.precision(old);
}

}  // namespace geolab
