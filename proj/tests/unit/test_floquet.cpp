#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cpo/floquet.hpp"
#include "cpo/rate_eq.hpp"
#include "cpo/units.hpp"

using namespace cpo;
using floquet::Harmonic;

namespace {

SystemParams params() { return SystemParams::cesium_d2_defaults(); }

MagneticEnvironment field(double b0) {
  MagneticEnvironment env;
  env.b0 = b0;
  return env;
}

floquet::BlochHarmonics solve_at(const SystemParams& p, const FieldDrive& d,
                                 const MagneticEnvironment& env, double v = 0.0,
                                 bool excited = true) {
  const auto local = floquet::local_conditions(env, d, 0.0, v, excited);
  return floquet::solve(floquet::assemble_floquet_system(p, d, local));
}

cdouble local_chi(const SystemParams& p, Polarization pol, double delta, double b0,
                  double v = 0.0) {
  const auto d = make_drive(p, pol, delta);
  return floquet::solve_local_susceptibility(
      p, d, floquet::local_conditions(field(b0), d, 0.0, v, false));
}

}  // namespace

TEST_CASE("index layout") {
  CHECK(floquet::index(Harmonic::dc, 0, 0) == 0);
  CHECK(floquet::index(Harmonic::plus, 1, 2) == 14);
  CHECK(floquet::index(Harmonic::minus, 2, 2) == 26);
}

TEST_CASE("no probe leaves the sidebands empty") {
  auto p = params();
  p.omega_p = 0.0;
  for (auto pol : {Polarization::lin_perp_lin, Polarization::circ_orthogonal}) {
    const auto h = solve_at(p, make_drive(p, pol, units::from_khz(50.0)), field(0.9));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(std::abs(h.at(Harmonic::plus, i, j)) == 0.0);
        CHECK(std::abs(h.at(Harmonic::minus, i, j)) == 0.0);
      }
    CHECK(h.trace_error() < 1e-12);
    CHECK(h.at(Harmonic::dc, 0, 0).real() > 0.0);
    CHECK(floquet::solve_local_susceptibility(
              p, make_drive(p, pol, 0.0), floquet::local_conditions(field(0.9), {}, 0.0)) ==
          cdouble{});
  }
}

TEST_CASE("no fields gives the unpumped ground mixture") {
  auto p = params();
  p.omega_c = 0.0;
  p.omega_p = 0.0;
  const auto h = solve_at(p, make_drive(p, Polarization::lin_perp_lin, 0.0), field(0.9));
  CHECK(std::abs(h.at(Harmonic::dc, 0, 0)) < 1e-14);
  CHECK(h.at(Harmonic::dc, 1, 1).real() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(h.at(Harmonic::dc, 2, 2).real() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(h.at(Harmonic::dc, 1, 2)) < 1e-14);
}

TEST_CASE("hermiticity and trace hold for random conditions") {
  const auto p = params();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const auto pol = k % 2 ? Polarization::lin_perp_lin : Polarization::circ_orthogonal;
    auto d = make_drive(p, pol, units::from_mhz(u(rng)), units::from_mhz(5 * u(rng)));
    const auto h = solve_at(p, d, field(0.9 + 0.5 * u(rng)), units::from_mhz(20 * u(rng)));
    CHECK(h.hermiticity_error() < 1e-10);
    CHECK(h.trace_error() < 1e-10);
  }
}

TEST_CASE("two-level line without coupling") {
  auto p = params();
  p.omega_c = 0.0;
  // Weak enough that probe pumping into its own dark state is negligible.
  p.omega_p *= 1e-3;
  const auto d = make_drive(p, Polarization::lin_perp_lin, 0.0);
  auto chi_at = [&](double detuning) {
    return floquet::solve_local_susceptibility(p, d,
                                               floquet::local_conditions(field(0.0), d, 0.0, detuning));
  };
  const cdouble c0 = chi_at(0.0);
  CHECK(c0.imag() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(c0.real()) < 1e-6);
  CHECK(chi_at(p.gamma_opt).imag() == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(chi_at(-p.gamma_opt).imag() == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(chi_at(3 * p.gamma_opt).imag() == doctest::Approx(0.1).epsilon(1e-5));
}

TEST_CASE("linear response in the probe") {
  auto p = params();
  for (auto pol : {Polarization::lin_perp_lin, Polarization::circ_orthogonal})
    for (double delta : {0.0, units::from_khz(60.0), units::from_mhz(-0.63), units::from_mhz(0.4)}) {
      const cdouble full = local_chi(p, pol, delta, 0.9);
      auto q = p;
      q.omega_p *= 0.5;
      const cdouble half = local_chi(q, pol, delta, 0.9);
      CHECK(std::abs(full - half) / std::abs(full) < 0.01);
    }
}

TEST_CASE("strong coupling saturates the absorption") {
  auto p = params();
  auto off = p;
  off.omega_c = 0.0;
  const double weak = local_chi(off, Polarization::lin_perp_lin, 0.0, 0.0).imag();
  p.omega_c = units::from_mhz(10.0);
  p.omega_p = units::from_khz(70.0);
  const double strong = local_chi(p, Polarization::lin_perp_lin, units::from_mhz(0.3), 0.9).imag();
  CHECK(strong < 0.5 * weak);
}

TEST_CASE("eit dip at the Raman resonance") {
  const auto p = params();
  const MagneticEnvironment env = field(0.9);
  const double two_dz = 2 * zeeman_shifts(env, 0.0).ground;
  auto absorb = [&](double delta) { return local_chi(p, Polarization::circ_orthogonal, delta, 0.9).imag(); };
  CHECK(absorb(two_dz) < absorb(two_dz + units::from_khz(300.0)));
  CHECK(absorb(two_dz) < absorb(two_dz - units::from_khz(300.0)));

  // Raman coherence harmonic is largest at delta = 2 Delta_Z.
  double best = 0.0, best_delta = 0.0;
  for (int k = -100; k <= 100; ++k) {
    const double delta = two_dz + k * units::from_khz(4.0);
    const auto h = solve_at(p, make_drive(p, Polarization::circ_orthogonal, delta), env, 0.0, false);
    const double r = std::abs(h.at(Harmonic::plus, floquet::level_m, floquet::level_p)) +
                     std::abs(h.at(Harmonic::plus, floquet::level_p, floquet::level_m));
    if (r > best) {
      best = r;
      best_delta = delta;
    }
  }
  CHECK(std::abs(best_delta - two_dz) <= units::from_khz(4.0));
  const auto c = floquet::local_conditions(env, make_drive(p, Polarization::circ_orthogonal, two_dz), 0.0);
  CHECK(std::abs(c.raman_detuning()) < 1e-6);
}

TEST_CASE("single velocity node reproduces the local response") {
  const auto p = params();
  quad::VelocitySpec spec;
  spec.rule = quad::VelocityRule::single;
  for (double delta : {0.0, units::from_mhz(-0.63)}) {
    const auto d = make_drive(p, Polarization::lin_perp_lin, delta);
    const cdouble avg = floquet::doppler_average(p, d, field(0.9), 1.0, spec, false);
    const cdouble loc = floquet::solve_local_susceptibility(
        p, d, floquet::local_conditions(field(0.9), d, 1.0, 0.0, false));
    CHECK(avg == loc);
  }
}

TEST_CASE("doppler-broadened linear absorption") {
  auto p = params();
  p.omega_c = 0.0;
  quad::VelocitySpec spec;
  auto absorb = [&](double cd) {
    const auto d = make_drive(p, Polarization::lin_perp_lin, 0.0, cd);
    return floquet::doppler_average(p, d, field(0.0), 0.0, spec).imag();
  };
  const double peak = absorb(0.0);
  // Bisection for the half maximum in coupling detuning.
  double lo = 0.0, hi = 3 * p.doppler_hwhm;
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    (absorb(mid) > 0.5 * peak ? lo : hi) = mid;
  }
  CHECK(lo == doctest::Approx(p.doppler_hwhm).epsilon(0.02));
  CHECK(absorb(-lo) == doctest::Approx(0.5 * peak).epsilon(1e-3));
}

TEST_CASE("doppler average converges on node doubling") {
  const auto p = params();
  quad::VelocitySpec spec;
  for (auto pol : {Polarization::lin_perp_lin, Polarization::circ_orthogonal})
    for (double delta : {0.0, units::from_mhz(-0.63), units::from_mhz(0.9)}) {
      double change = 1.0;
      floquet::doppler_average_checked(p, make_drive(p, pol, delta), field(0.9), 2.5, spec, true,
                                       5e-3, &change);
      CHECK(change < 5e-3);
    }
  quad::VelocitySpec coarse;
  coarse.nodes = 5;
  CHECK_THROWS_AS(floquet::doppler_average_checked(p, make_drive(p, Polarization::lin_perp_lin, 0.0),
                                                   field(0.9), 2.5, coarse, true, 5e-3),
                  NumericError);
}

TEST_CASE("narrow population resonance matches the rate model") {
  // Doppler-free resonant atoms, Raman resonances moved far away.
  const auto p = params();
  const MagneticEnvironment env = field(2.0);
  const auto d0 = make_drive(p, Polarization::lin_perp_lin, 0.0);
  auto floquet_w1 = [&](double delta) {
    const auto h = solve_at(p, make_drive(p, Polarization::lin_perp_lin, delta), env, 0.0, false);
    return 2.0 * (h.at(Harmonic::plus, 0, 0) - h.at(Harmonic::plus, 1, 1));
  };
  auto rate_w1 = [&](double delta) {
    auto d = d0;
    d.delta = delta;
    return rate::first_harmonics(p, d).w1_minus;
  };
  const cdouble f0 = floquet_w1(0.0), r0 = rate_w1(0.0);
  for (int k = -3; k <= 3; ++k) {
    const double delta = k * p.gamma_t;
    const cdouble fs = floquet_w1(delta) / f0;
    const cdouble rs = rate_w1(delta) / r0;
    CHECK(std::abs(fs - rs) < 0.1);
  }
  CHECK(std::abs(f0 / r0) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("transmission spectrum calibration") {
  const auto p = params();
  floquet::FloquetOptions opt;
  opt.z_nodes = 1;
  const auto env = field(0.9);
  const auto d = make_drive(p, Polarization::lin_perp_lin, 0.0);
  const double kappa = floquet::calibrate_optical_depth(p, d, env, opt, 0.27);
  CHECK(kappa > 0.0);
  auto q = p;
  q.omega_c = 0.0;
  auto off = opt;
  off.calibration_transmission.reset();
  off.optical_depth_scale = kappa;
  const std::vector<double> deltas{0.0};
  const auto t = floquet::transmission_spectrum(q, make_drive(q, Polarization::lin_perp_lin, 0.0),
                                                env, deltas, off);
  CHECK(t.transmission[0] == doctest::Approx(0.27).epsilon(1e-9));
  CHECK(t.model == ModelKind::floquet);
  CHECK_THROWS_AS(floquet::transmission_spectrum(p, d, env, std::vector<double>{}, opt),
                  ValidationError);
}

TEST_CASE("spectrum is independent of the worker count") {
  const auto p = params();
  floquet::FloquetOptions opt;
  opt.z_nodes = 3;
  opt.velocity.nodes = 33;
  auto env = field(0.9);
  env.db_dz = 0.03;
  std::vector<double> deltas;
  for (int k = -20; k <= 20; ++k) deltas.push_back(units::from_mhz(0.05 * k));
  const auto d = make_drive(p, Polarization::lin_perp_lin, 0.0);
  const auto a = floquet::transmission_spectrum(p, d, env, deltas, opt);
  opt.workers = 4;
  const auto b = floquet::transmission_spectrum(p, d, env, deltas, opt);
  CHECK(a.transmission == b.transmission);
}

TEST_CASE("gradient environment keeps the centre field") {
  const auto env = field(0.9);
  const auto g = floquet::with_gradient(env, 0.045, true);
  CHECK(g.mean_field() == doctest::Approx(env.mean_field()).epsilon(1e-15));
  CHECK(g.db_dz == 0.045);
  const auto e = floquet::with_gradient(env, 0.045, false);
  CHECK(e.b0 == env.b0);
}
