#include "cpo/rate_eq.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "cpo/kernels.hpp"

namespace cpo::rate {

double PopulationState::inversion(Leg leg) const {
  const double ground = leg == Leg::minus ? n_m1 : n_p1;
  return 2.0 * (n_e - ground);
}

double dc_inversion(const SystemParams& p, double i0) {
  if (!(i0 >= 0.0)) throw ValidationError("pump_rate_negative", "i0 must be nonnegative");
  const double g = p.gamma0 + p.gamma_t;
  return -g / (g + 3.0 * i0);
}

HarmonicTerms harmonic_terms(const SystemParams& p, const FieldDrive& d) {
  const cdouble i_delta(0.0, d.delta);
  HarmonicTerms t;
  t.broad = 3.0 * (d.i1_minus + d.i1_plus) / (p.gamma0 + p.gamma_t + 3.0 * d.i0 - i_delta);
  t.narrow = (d.i1_minus - d.i1_plus) / (p.gamma_t + d.i0 - i_delta);
  return t;
}

HarmonicInversion first_harmonics(const SystemParams& p, const FieldDrive& d) {
  HarmonicInversion h;
  h.w0 = dc_inversion(p, d.i0);
  const auto t = harmonic_terms(p, d);
  h.w1_minus = -0.5 * h.w0 * (t.broad + t.narrow);
  h.w1_plus = -0.5 * h.w0 * (t.broad - t.narrow);
  return h;
}

double default_optical_depth() { return -std::log(0.27); }

SpectrumTrace rate_spectrum(const SystemParams& p, const FieldDrive& d,
                            std::span<const double> deltas, double optical_depth) {
  if (deltas.empty()) throw ValidationError("empty_delta_grid", "delta grid is empty");
  for (std::size_t k = 1; k < deltas.size(); ++k)
    if (!(deltas[k] > deltas[k - 1]))
      throw ValidationError("trace_not_increasing", "delta grid must be strictly increasing");

  const double w0 = dc_inversion(p, d.i0);
  const double broad_width = p.gamma0 + p.gamma_t + 3.0 * d.i0;
  const double narrow_width = p.gamma_t + d.i0;
  const cdouble broad_num = 3.0 * (d.i1_minus + d.i1_plus);
  const cdouble narrow_num = d.i1_minus - d.i1_plus;

  // Leg sign of the narrow term: + on |-1>, - on |+1>.
  const std::array<cdouble, leg_count> sidebands{d.i1_minus, d.i1_plus};
  const std::array<double, leg_count> narrow_sign{1.0, -1.0};
  double power = 0.0;
  for (const auto& s : sidebands) power += std::norm(s);

  std::vector<double> shift(deltas.size(), 0.0);
  if (power > 0.0) {
    for (std::size_t g = 0; g < leg_count; ++g) {
      if (sidebands[g] == cdouble{}) continue;
      const double weight = std::norm(sidebands[g]) / power;
      const cdouble refer = weight * (-0.5 * w0) * d.i0 / sidebands[g];
      kernels::lorentzian_accumulate(refer * broad_num, broad_width, deltas, shift);
      kernels::lorentzian_accumulate(refer * narrow_sign[g] * narrow_num, narrow_width, deltas,
                                     shift);
    }
  }

  SpectrumTrace trace;
  trace.model = ModelKind::rate;
  trace.deltas.assign(deltas.begin(), deltas.end());
  trace.transmission.resize(deltas.size());
  const double t_dc = std::exp(optical_depth * w0);
  for (std::size_t k = 0; k < deltas.size(); ++k)
    trace.transmission[k] = t_dc * (1.0 + optical_depth * shift[k]);
  return trace;
}

LegIntensities modulated_intensities(const FieldDrive& d) {
  auto leg = [i0 = d.i0, delta = d.delta](cdouble i1) {
    return [i0, delta, i1](double t) {
      return i0 + 2.0 * (i1 * std::exp(cdouble(0.0, -delta * t))).real();
    };
  };
  return {leg(d.i1_minus), leg(d.i1_plus)};
}

Trajectory integrate_populations(const SystemParams& p, const LegIntensities& in,
                                 const PopulationState& initial,
                                 std::span<const double> sample_times,
                                 const ode::IntegratorOptions& options) {
  using State = std::array<double, 3>;
  const double g0 = p.gamma0;
  const double gt = p.gamma_t;
  auto rhs = [&](const State& x, State& dx, double t) {
    const double im = in.minus ? in.minus(t) : 0.0;
    const double ip = in.plus ? in.plus(t) : 0.0;
    const double ne = x[0], nm = x[1], np = x[2];
    const double source = 0.5 * gt * (ne + nm + np);
    const double pump_m = im * (nm - ne);
    const double pump_p = ip * (np - ne);
    dx[0] = -(g0 + gt) * ne + pump_m + pump_p;
    dx[1] = source + 0.5 * g0 * ne - gt * nm - pump_m;
    dx[2] = source + 0.5 * g0 * ne - gt * np - pump_p;
  };

  Trajectory traj;
  traj.times.assign(sample_times.begin(), sample_times.end());
  traj.states.resize(sample_times.size());
  ode::integrate_sampled(
      rhs, State{initial.n_e, initial.n_m1, initial.n_p1}, sample_times,
      [&](std::size_t i, const State& s) { traj.states[i] = {s[0], s[1], s[2]}; }, options,
      "rate equations");
  return traj;
}

}  // namespace cpo::rate
