#pragma once

// Thin stepping layer over Boost.Odeint's controlled Runge-Kutta-Fehlberg 7(8)
// pair. Callers drive the stepper explicitly so they can record accepted
// steps, stop on events, or hit a uniform output grid.

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "geolab/errors.hpp"

namespace geolab::ode {

using State = std::vector<double>;
using System = std::function<void(const State&, State&, double)>;

struct StepperOptions {
  double tol = 1e-10;  // absolute and relative local error bound
  double min_step = 1e-13;
  std::size_t max_steps = 2'000'000;
};

class Stepper {
 public:
  Stepper(System system, StepperOptions opts)
      : system_(std::move(system)),
        opts_(opts),
        stepper_(boost::numeric::odeint::make_controlled(
            opts.tol, opts.tol, boost::numeric::odeint::runge_kutta_fehlberg78<State>())) {}

  /// Takes one accepted step from (x, t) not passing t_limit. Returns the new
  /// time; x is updated in place.
  double step(State& x, double t, double t_limit) {
    namespace odeint = boost::numeric::odeint;
    if (dt_ <= 0.0) dt_ = std::min(1e-3, std::abs(t_limit - t));
    for (;;) {
      const double remaining = t_limit - t;
      double dt = std::min(dt_, remaining);
      if (++steps_ > opts_.max_steps) throw StepUnderflow("step budget exhausted");
      const double dt_before = dt;
      const double t_before = t;
      const State x_before = x;
      const odeint::controlled_step_result res = stepper_.try_step(std::ref(system_), x, t, dt);
      if (res == odeint::success) {
        if (std::all_of(x.begin(), x.end(), [](double xi) { return std::isfinite(xi); })) {
          // Keep the proposed size when the step was shortened only to land on t_limit.
          dt_ = dt_before < dt_ ? std::max(dt_, dt) : dt;
          return t;
        }
        // A stage left the domain of the system; retry with a much shorter step.
        x = x_before;
        t = t_before;
        dt = 0.25 * dt_before;
      }
      dt_ = dt;
      if (dt_ < opts_.min_step)
        throw StepUnderflow("step size fell below " + std::to_string(opts_.min_step));
    }
  }

  /// Integrates from t to t_end exactly (t_end > t).
  double advance(State& x, double t, double t_end) {
    while (t < t_end) {
      t = step(x, t, t_end);
      if (t_end - t <= 1e-15 * std::max(1.0, std::abs(t_end))) t = t_end;
    }
    return t;
  }

  void reset_step(double dt) { dt_ = dt; }
  std::size_t steps_taken() const noexcept { return steps_; }

 private:
  System system_;
  StepperOptions opts_;
  boost::numeric::odeint::controlled_runge_kutta<
      boost::numeric::odeint::runge_kutta_fehlberg78<State>>
      stepper_;
  double dt_ = 0.0;
  std::size_t steps_ = 0;
};

/// Equal steps of the same embedded pair on a uniform grid. Each grid interval
/// is split into `substeps` equal pieces; the count doubles (for the rest of
/// the run) whenever the error estimate exceeds the tolerance. With equal steps
/// the global error is a smooth function of t, so node values can be differenced.
class GridStepper {
 public:
  GridStepper(System system, StepperOptions opts) : system_(std::move(system)), opts_(opts) {}

  void advance(State& x, double t, double h) {
    const State start = x;
    for (;;) {
      x = start;
      bool ok = false;
      try {
        ok = try_interval(x, t, h);
      } catch (...) {
        x = start;
        throw;
      }
      if (ok) return;
      substeps_ *= 2;
      if (substeps_ > max_substeps || h / substeps_ < opts_.min_step) {
        x = start;
        throw StepUnderflow("step size fell below " + std::to_string(opts_.min_step));
      }
    }
  }

  std::size_t substeps() const noexcept { return substeps_; }

  static constexpr std::size_t max_substeps = 1u << 16;

 private:
  bool try_interval(State& x, double t, double h) {
    const double dt = h / static_cast<double>(substeps_);
    State err(x.size());
    for (std::size_t i = 0; i < substeps_; ++i) {
      if (++steps_ > opts_.max_steps) throw StepUnderflow("step budget exhausted");
      rk_.do_step(std::ref(system_), x, t + static_cast<double>(i) * dt, dt, err);
      for (std::size_t j = 0; j < x.size(); ++j) {
        if (!std::isfinite(x[j])) return false;
        if (std::abs(err[j]) > opts_.tol * (1.0 + std::abs(x[j]))) return false;
      }
    }
    return true;
  }

  System system_;
  StepperOptions opts_;
  boost::numeric::odeint::runge_kutta_fehlberg78<State> rk_;
  std::size_t substeps_ = 1;
  std::size_t steps_ = 0;
};

}  // namespace geolab::ode
