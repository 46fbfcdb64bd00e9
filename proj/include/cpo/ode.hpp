#pragma once

#include <boost/numeric/odeint.hpp>
#include <cstddef>
#include <span>
#include <string>

#include "cpo/error.hpp"

namespace cpo::ode {

struct IntegratorOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double initial_dt = 1e-9;  // s
  // Steps allowed between two consecutive sample times.
  std::size_t max_steps_per_sample = 2'000'000;
};

/// Adaptive Dormand-Prince integration with dense output, sampled at the
/// given increasing times (integration starts at times[0] from `x`).
/// `observe(index, state)` is called for every sample. Step-size underflow or
/// a step budget overrun is reported as NumericError("integration_failure").
template <class State, class System, class Observer>
void integrate_sampled(System&& system, State x, std::span<const double> times,
                       Observer&& observe, const IntegratorOptions& opt = {},
                       const std::string& context = {}) {
  namespace odeint = boost::numeric::odeint;
  if (times.empty()) return;
  auto stepper =
      odeint::make_dense_output(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
  std::size_t index = 0;
  auto obs = [&](const State& s, double) { observe(index++, s); };
  try {
    odeint::integrate_times(stepper, system, x, times.begin(), times.end(), opt.initial_dt, obs,
                            odeint::max_step_checker(static_cast<int>(opt.max_steps_per_sample)));
  } catch (const odeint::odeint_error& e) {
    std::string msg = "ODE integration failed";
    if (!context.empty()) msg += " (" + context + ")";
    msg += ": ";
    msg += e.what();
    throw NumericError("integration_failure", msg);
  }
}

}  // namespace cpo::ode
