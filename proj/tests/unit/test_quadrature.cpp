#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>

#include "cpo/error.hpp"
#include "cpo/quadrature.hpp"
#include "cpo/units.hpp"

using namespace cpo;

TEST_CASE("gauss-hermite moments") {
  for (std::size_t n : {1u, 2u, 5u, 20u, 96u}) {
    const auto r = quad::gauss_hermite(n);
    REQUIRE(r.size() == n);
    for (std::size_t k = 0; 2 * k <= 2 * n - 1 && k <= 12; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], 2.0 * k);
      const double exact = std::tgamma(k + 0.5);
      CHECK(s == doctest::Approx(exact).epsilon(1e-10));
    }
    double odd = 0.0;
    for (std::size_t i = 0; i < n; ++i) odd += r.weights[i] * std::pow(r.nodes[i], 3);
    CHECK(std::abs(odd) < 1e-10);
    for (std::size_t i = 1; i < n; ++i) CHECK(r.nodes[i] > r.nodes[i - 1]);
  }
  CHECK_THROWS_AS(quad::gauss_hermite(0), ValidationError);
}

TEST_CASE("cell average") {
  const auto r = quad::cell_average(65, 5.0);
  double w = 0.0, m1 = 0.0, m3 = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    w += r.weights[i];
    m1 += r.weights[i] * r.nodes[i];
    m3 += r.weights[i] * std::pow(r.nodes[i], 3);
  }
  CHECK(w == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m1 == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(m3 == doctest::Approx(std::pow(5.0, 3) / 4).epsilon(1e-13));
  CHECK(r.nodes.front() == 0.0);
  CHECK(r.nodes.back() == 5.0);

  const auto one = quad::cell_average(1, 5.0);
  CHECK(one.nodes[0] == 2.5);
  CHECK(one.weights[0] == 1.0);
  CHECK_THROWS_AS(quad::cell_average(4, 5.0), ValidationError);
  CHECK_THROWS_AS(quad::cell_average(5, 0.0), ValidationError);
}

namespace {

double gaussian_integral(const quad::Rule& r, double power) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], power);
  return s;
}

}  // namespace

TEST_CASE("doppler rules integrate the gaussian") {
  const double wd = units::from_mhz(190.0);
  const double gamma = units::from_mhz(2.6);
  const double sigma = wd / std::sqrt(2.0 * std::numbers::ln2);
  for (auto rule : {quad::VelocityRule::sinh_trapezoid, quad::VelocityRule::gauss_hermite}) {
    quad::VelocitySpec spec;
    spec.rule = rule;
    spec.nodes = 129;
    const auto r = quad::doppler_rule(spec, wd, gamma);
    CHECK(gaussian_integral(r, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(gaussian_integral(r, 2) == doctest::Approx(sigma * sigma).epsilon(1e-5));
  }
  quad::VelocitySpec single;
  single.rule = quad::VelocityRule::single;
  const auto s = quad::doppler_rule(single, wd, gamma);
  CHECK(s.size() == 1);
  CHECK(s.weights[0] == 1.0);
}

TEST_CASE("sinh rule resolves a narrow lorentzian under the gaussian") {
  const double wd = units::from_mhz(190.0);
  const double gamma = units::from_mhz(2.6);
  const double sigma = wd / std::sqrt(2.0 * std::numbers::ln2);
  const double y = gamma / (sigma * std::sqrt(2.0));
  // Voigt at line centre from the Faddeeva function on the imaginary axis.
  const double exact = std::numbers::pi * std::exp(y * y) * boost::math::erfc(y) /
                       (sigma * std::sqrt(2.0 * std::numbers::pi));
  for (double centre : {0.0, units::from_mhz(40.0), units::from_mhz(-300.0)}) {
    auto lorentz = [&](double x) { return gamma / (gamma * gamma + (x - centre) * (x - centre)); };
    auto f = [&](double x) {
      const double g = std::exp(-0.5 * x * x / (sigma * sigma)) /
                       (std::sqrt(2.0 * std::numbers::pi) * sigma);
      return g * lorentz(x);
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    const double oracle =
        ts.integrate(f, centre - 12 * sigma, centre) + ts.integrate(f, centre, centre + 12 * sigma);
    if (centre == 0.0) CHECK(oracle == doctest::Approx(exact).epsilon(1e-9));

    quad::VelocitySpec spec;
    const auto r = quad::doppler_rule(spec, wd, gamma, centre);
    double v = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) v += r.weights[i] * lorentz(r.nodes[i]);
    CHECK(v == doctest::Approx(oracle).epsilon(1e-6));
  }

  quad::VelocitySpec spec;
  const auto coarse = quad::doppler_rule(spec, wd, gamma);
  const auto fine = quad::doppler_rule(spec.doubled(), wd, gamma);
  CHECK(fine.size() == 2 * coarse.size() - 1);
  for (std::size_t i = 0; i < coarse.size(); ++i)
    CHECK(fine.nodes[2 * i] == doctest::Approx(coarse.nodes[i]).scale(1.0));
}

TEST_CASE("rule names") {
  CHECK(quad::parse_velocity_rule("gauss_hermite") == quad::VelocityRule::gauss_hermite);
  CHECK(quad::parse_velocity_rule(quad::to_string(quad::VelocityRule::single)) ==
        quad::VelocityRule::single);
  CHECK_THROWS_AS(quad::parse_velocity_rule("simpson"), ValidationError);
}
