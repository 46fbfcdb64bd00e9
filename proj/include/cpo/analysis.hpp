#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cpo/lambda_model.hpp"

namespace cpo::analysis {

struct Peak {
  std::size_t index = 0;
  double position = 0.0;
  double height = 0.0;
  double prominence = 0.0;
};

/// Local maxima whose prominence (height above the higher of the two
/// bounding minima) is at least `min_prominence`, sorted by |position|.
/// Plateaus report their middle sample. Needs at least 16 samples.
std::vector<Peak> find_peaks(std::span<const double> x, std::span<const double> y,
                             double min_prominence);
std::vector<Peak> find_peaks(const SpectrumTrace& trace, double min_prominence);

/// offset + amplitude / (1 + (2 (x - center) / fwhm)^2)
double lorentzian(double x, double center, double fwhm, double amplitude, double offset);

struct LorentzianFit {
  double center = 0.0;
  double fwhm = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct ExpDecayFit {
  double amplitude = 0.0;
  double tau = 0.0;
  double offset = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

struct FitOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-13;
};

/// Starting point of the Lorentzian fit: baseline from the window edges,
/// extremum for centre and amplitude, FWHM from the interpolated half-maximum
/// crossings. Dips get a negative amplitude.
LorentzianFit initial_lorentzian(std::span<const double> x, std::span<const double> y);

/// Levenberg-Marquardt least squares for a single Lorentzian plus offset.
/// Needs at least 9 points. A fit that does not converge within the
/// iteration budget is returned with converged = false.
LorentzianFit fit_lorentzian(std::span<const double> x, std::span<const double> y,
                             const FitOptions& options = {});

/// Least squares A exp(-t / tau) (+ offset), in linear space, started from a
/// log-linear regression. Needs at least 4 points with positive amplitudes.
ExpDecayFit fit_exponential(std::span<const double> t, std::span<const double> y,
                            bool with_offset = false, const FitOptions& options = {});
ExpDecayFit fit_exponential(const DecayCurve& curve, bool with_offset = false);

/// Ordinary least squares. Needs at least 3 points and distinct x values.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace cpo::analysis
