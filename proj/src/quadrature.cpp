#include "cpo/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "cpo/error.hpp"

namespace cpo::quad {

Rule gauss_hermite(std::size_t n) {
  if (n == 0) throw ValidationError("quadrature_nodes", "Gauss-Hermite needs at least one node");
  // Newton iteration on the orthonormal Hermite recurrence with the usual
  // asymptotic starting guesses; roots are symmetric so only half are found.
  Rule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
  const std::size_t m = (n + 1) / 2;
  const double nd = static_cast<double>(n);
  double z = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * nd + 1.0) - 1.85575 * std::pow(2.0 * nd + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(nd, 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * rule.nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * rule.nodes[1];
    else
      z = 2.0 * z - rule.nodes[i - 2];

    double pp = 0.0;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jd = static_cast<double>(j);
        p1 = z * std::sqrt(2.0 / (jd + 1.0)) * p2 - std::sqrt(jd / (jd + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * nd) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw NumericError("quadrature_setup", "Gauss-Hermite root iteration did not converge");
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = 2.0 / (pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  // Ascending order.
  for (std::size_t i = 0; i < n / 2; ++i) {
    std::swap(rule.nodes[i], rule.nodes[n - 1 - i]);
    std::swap(rule.weights[i], rule.weights[n - 1 - i]);
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

Rule cell_average(std::size_t n, double length) {
  if (!(length > 0.0)) throw ValidationError("cell_length", "cell length must be positive");
  Rule rule;
  if (n == 1) {
    rule.nodes = {0.5 * length};
    rule.weights = {1.0};
    return rule;
  }
  if (n < 3 || n % 2 == 0)
    throw ValidationError("z_nodes", "cell rule needs an odd number of nodes >= 3 (or 1)");
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double h = length / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] = static_cast<double>(i) * h;
    const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    rule.weights[i] = w * h / (3.0 * length);
  }
  rule.nodes.back() = length;
  return rule;
}

std::string_view to_string(VelocityRule r) {
  switch (r) {
    case VelocityRule::sinh_trapezoid: return "sinh_trapezoid";
    case VelocityRule::gauss_hermite: return "gauss_hermite";
    case VelocityRule::single: return "single";
  }
  return "unknown";
}

VelocityRule parse_velocity_rule(std::string_view s) {
  if (s == "sinh_trapezoid" || s == "sinh") return VelocityRule::sinh_trapezoid;
  if (s == "gauss_hermite" || s == "hermite") return VelocityRule::gauss_hermite;
  if (s == "single") return VelocityRule::single;
  throw ValidationError("unknown_velocity_rule", "unknown velocity rule '" + std::string(s) + "'");
}

VelocitySpec VelocitySpec::doubled() const {
  VelocitySpec d = *this;
  if (rule == VelocityRule::sinh_trapezoid)
    d.nodes = 2 * nodes - 1;  // nested: keeps every old node
  else if (rule == VelocityRule::gauss_hermite)
    d.nodes = 2 * nodes;
  return d;
}

Rule doppler_rule(const VelocitySpec& spec, double doppler_hwhm, double gamma_opt,
                  double centre) {
  if (spec.rule == VelocityRule::single) return Rule{{0.0}, {1.0}};
  if (!(doppler_hwhm > 0.0))
    throw ValidationError("doppler_width", "Doppler width must be positive for this rule");
  const double sigma = doppler_hwhm / std::sqrt(2.0 * std::numbers::ln2);
  const std::size_t n = spec.nodes;

  if (spec.rule == VelocityRule::gauss_hermite) {
    Rule gh = gauss_hermite(n);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    for (std::size_t i = 0; i < n; ++i) {
      gh.nodes[i] *= std::sqrt(2.0) * sigma;
      gh.weights[i] *= inv_sqrt_pi;
    }
    return gh;
  }

  if (n < 3 || n % 2 == 0)
    throw ValidationError("velocity_nodes", "sinh rule needs an odd number of nodes >= 3");
  const double scale = spec.scale_in_gamma * gamma_opt;
  if (!(scale > 0.0)) throw ValidationError("velocity_scale", "sinh rule scale must be positive");
  const double reach = spec.span_sigmas * sigma + std::abs(centre);
  const double umax = std::asinh(reach / scale);
  const double h = 2.0 * umax / static_cast<double>(n - 1);
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);

  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = -umax + static_cast<double>(i) * h;
    const double x = centre + scale * std::sinh(u);
    const double g = norm * std::exp(-0.5 * (x / sigma) * (x / sigma));
    const double end = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    rule.nodes[i] = x;
    rule.weights[i] = end * h * scale * std::cosh(u) * g;
  }
  return rule;
}

}  // namespace cpo::quad
