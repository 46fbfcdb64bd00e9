#include <doctest.h>

#include <cmath>
#include <random>

#include "cpo/lambda_model.hpp"
#include "cpo/units.hpp"

using namespace cpo;

TEST_CASE("cesium defaults are valid") {
  const auto p = SystemParams::cesium_d2_defaults();
  CHECK(units::to_mhz(p.gamma0) == doctest::Approx(5.2));
  CHECK(units::to_khz(p.gamma_t) == doctest::Approx(40.0));
  CHECK(p.gamma_opt == doctest::Approx(p.gamma0 / 2));
  CHECK(units::to_mhz(p.doppler_hwhm) == doctest::Approx(190.0));
  for (auto pol : {Polarization::lin_perp_lin, Polarization::circ_orthogonal}) {
    const auto r = validate(p, make_drive(p, pol, 0.0));
    CHECK(r.ok());
    CHECK_FALSE(r.has("probe_weak_margin"));
  }
}

TEST_CASE("validation diagnostics") {
  const auto p = SystemParams::cesium_d2_defaults();
  const auto drive = make_drive(p, Polarization::lin_perp_lin, 0.0);

  SUBCASE("probe stronger than coupling") {
    auto q = p;
    q.omega_p = 2 * q.omega_c;
    const auto r = validate(q, drive);
    CHECK_FALSE(r.ok());
    CHECK(r.has("probe_not_perturbative"));
  }
  SUBCASE("weak-probe margin is a warning") {
    auto q = p;
    q.omega_p = 0.5 * q.omega_c;
    const auto r = validate(q, drive);
    CHECK(r.ok());
    CHECK(r.has("probe_weak_margin"));
  }
  SUBCASE("broken antiphase") {
    auto d = drive;
    d.i1_plus = d.i1_minus;
    const auto r = validate(p, d);
    CHECK(r.has("antiphase_constraint_violated"));
    CHECK_THROWS_AS(validated_or_throw(p, d), ValidationError);
  }
  SUBCASE("nonpositive rates") {
    auto q = p;
    q.gamma_t = 0.0;
    CHECK(validate(q, drive).has("rate_not_positive"));
    q = p;
    q.gamma_t = 2 * q.gamma0;
    CHECK(validate(q, drive).has("transit_not_slow"));
  }
  SUBCASE("large sidebands") {
    auto d = drive;
    d.i1_minus = 0.3 * d.i0;
    d.i1_plus = -d.i1_minus;
    CHECK(validate(p, d).has("sideband_not_perturbative"));
  }
  SUBCASE("negative pump") {
    auto d = drive;
    d.i0 = -1.0;
    d.i1_minus = d.i1_plus = 0.0;
    CHECK(validate(p, d).has("pump_rate_negative"));
  }
  SUBCASE("error carries code and kind") {
    auto q = p;
    q.omega_p = 2 * q.omega_c;
    try {
      validated_or_throw(q, drive);
      FAIL("no throw");
    } catch (const ValidationError& e) {
      CHECK(e.code() == "probe_not_perturbative");
      CHECK(e.kind() == ErrorKind::validation);
    }
  }
}

TEST_CASE("drive construction") {
  const auto p = SystemParams::cesium_d2_defaults();
  const auto lin = make_drive(p, Polarization::lin_perp_lin, 1.0);
  CHECK(lin.i0 == doctest::Approx(p.omega_c * p.omega_c / (2 * p.gamma_opt)));
  CHECK(lin.i1_plus == -lin.i1_minus);
  CHECK(std::abs(lin.i1_minus) == doctest::Approx(lin.i0 * p.omega_p / p.omega_c));
  const auto circ = make_drive(p, Polarization::circ_orthogonal, 1.0);
  CHECK(circ.i1_minus == cdouble{});
  CHECK(circ.i1_plus == cdouble{});

  const auto a = leg_amplitudes(Polarization::lin_perp_lin, 2.0, 0.5);
  CHECK(a.coupling[0] == a.coupling[1]);
  CHECK(a.probe[0] == -a.probe[1]);
  const auto c = leg_amplitudes(Polarization::circ_orthogonal, 2.0, 0.5);
  CHECK(c.coupling[0] == cdouble{});
  CHECK(c.probe[1] == cdouble{});
  for (auto pol : {Polarization::lin_perp_lin, Polarization::circ_orthogonal}) {
    const auto ch = probe_channel(pol);
    CHECK(std::norm(ch[0]) + std::norm(ch[1]) == doctest::Approx(1.0));
  }
}

TEST_CASE("unit round trip") {
  SystemParamsOrdinary in;
  in.gamma0_mhz = 5.2;
  in.gamma_t_khz = 40.0;
  in.gamma_opt_mhz = 2.6;
  in.doppler_hwhm_mhz = 190.0;
  in.omega_c_mhz = 0.4;
  in.omega_p_khz = 70.0;
  const auto out = to_ordinary(from_ordinary(in));
  const auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  CHECK(rel(out.gamma0_mhz, in.gamma0_mhz) < 1e-12);
  CHECK(rel(out.gamma_t_khz, in.gamma_t_khz) < 1e-12);
  CHECK(rel(*out.gamma_opt_mhz, *in.gamma_opt_mhz) < 1e-12);
  CHECK(rel(out.doppler_hwhm_mhz, in.doppler_hwhm_mhz) < 1e-12);
  CHECK(rel(out.omega_c_mhz, in.omega_c_mhz) < 1e-12);
  CHECK(rel(out.omega_p_khz, in.omega_p_khz) < 1e-12);

  SystemParamsOrdinary d;
  CHECK(from_ordinary(d).gamma_opt == doctest::Approx(from_ordinary(d).gamma0 / 2));
}

TEST_CASE("zeeman shifts") {
  MagneticEnvironment env;
  env.b0 = 0.9;
  for (double z : {0.0, 2.5, 5.0}) {
    const auto s = zeeman_shifts(env, z);
    CHECK(units::to_mhz(s.ground) == doctest::Approx(-0.315));
    CHECK(units::to_mhz(s.excited) == doctest::Approx(-0.855));
  }
  CHECK(std::abs(2 * units::to_mhz(zeeman_shifts(env, 0).ground)) == doctest::Approx(0.63));

  env.b0 = 0.0;
  CHECK(zeeman_shifts(env, 3.0).ground == 0.0);
  CHECK(zeeman_shifts(env, 3.0).excited == 0.0);

  env.db_dz = 0.045;
  CHECK(units::to_mhz(zeeman_shifts(env, 5.0).ground) == doctest::Approx(-0.35 * 0.225));

  CHECK_THROWS_AS(zeeman_shifts(env, -0.1), ValidationError);
  CHECK_THROWS_AS(zeeman_shifts(env, 5.1), ValidationError);
}

TEST_CASE("zeeman shifts superpose") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0), zd(0.0, 5.0);
  for (int k = 0; k < 50; ++k) {
    MagneticEnvironment a, b, sum;
    a.b0 = u(rng);
    a.db_dz = 0.1 * u(rng);
    b.b0 = u(rng);
    b.db_dz = 0.1 * u(rng);
    sum.b0 = a.b0 + b.b0;
    sum.db_dz = a.db_dz + b.db_dz;
    const double z = zd(rng);
    const double lhs = zeeman_shifts(sum, z).ground;
    const double rhs = zeeman_shifts(a, z).ground + zeeman_shifts(b, z).ground;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12).scale(1e6));
    const double z2 = zd(rng);
    const double s0 = zeeman_shifts(a, 0.0).ground;
    const double slope1 = (zeeman_shifts(a, z).ground - s0) / z;
    const double slope2 = (zeeman_shifts(a, z2).ground - s0) / z2;
    CHECK(slope1 == doctest::Approx(slope2).epsilon(1e-9).scale(1e3));
  }
}

TEST_CASE("enum parsing") {
  CHECK(parse_polarization("lin_perp_lin") == Polarization::lin_perp_lin);
  CHECK(parse_polarization(to_string(Polarization::circ_orthogonal)) ==
        Polarization::circ_orthogonal);
  CHECK_THROWS_AS(parse_polarization("diagonal"), ValidationError);
  CHECK(parse_model("rate") == ModelKind::rate);
  CHECK_THROWS_AS(parse_model("exact"), ValidationError);
  CHECK(parse_memory("eit") == MemoryKind::eit);
  CHECK_THROWS_AS(parse_memory("raman"), ValidationError);
}

TEST_CASE("container checks") {
  SpectrumTrace t;
  t.deltas = {0.0, 1.0, 1.0};
  t.transmission = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(t.check(), ValidationError);
  t.deltas = {0.0, 1.0, 2.0};
  CHECK_NOTHROW(t.check());
  t.transmission[1] = 1.5;
  CHECK_THROWS_AS(t.check(), ValidationError);

  DecayCurve c;
  c.storage_times = {1.0, 2.0};
  c.amplitudes = {1.0, -0.1};
  CHECK_THROWS_AS(c.check(), ValidationError);
}
