#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace cpo::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Hermite rule for the weight exp(-x^2) on the real line.
Rule gauss_hermite(std::size_t n);

/// Composite Simpson rule over [0, length] (n odd, n >= 3) with weights
/// normalised to sum to one, i.e. a cell average. n == 1 gives the midpoint.
Rule cell_average(std::size_t n, double length);

enum class VelocityRule {
  // Trapezoid in u with detuning = centre + scale*sinh(u). Resolves the
  // homogeneous line (scale ~ gamma_opt) and the Doppler wings (~W_D) with
  // one rule; the integrand is smooth and decays at both ends in u.
  sinh_trapezoid,
  // Gauss-Hermite nodes mapped onto the Gaussian.
  gauss_hermite,
  // One node at zero detuning with unit weight (Doppler-free limit).
  single,
};

std::string_view to_string(VelocityRule r);
VelocityRule parse_velocity_rule(std::string_view s);

struct VelocitySpec {
  VelocityRule rule = VelocityRule::sinh_trapezoid;
  std::size_t nodes = 129;
  // Inner scale of the sinh map in units of gamma_opt.
  double scale_in_gamma = 1.0;
  // Extent of the rule in Gaussian standard deviations.
  double span_sigmas = 6.0;

  VelocitySpec doubled() const;
};

/// Nodes are Doppler offsets of the laser frequency seen by an atom (rad/s);
/// weights integrate against the Gaussian velocity distribution with half
/// width at half maximum `doppler_hwhm`, so they sum to ~1. `centre` is where
/// the homogeneous response peaks; the sinh rule clusters nodes there.
Rule doppler_rule(const VelocitySpec& spec, double doppler_hwhm, double gamma_opt,
                  double centre = 0.0);

}  // namespace cpo::quad
