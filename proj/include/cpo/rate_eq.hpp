#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cpo/lambda_model.hpp"
#include "cpo/ode.hpp"

// Three-level rate equations for the populations of |e>, |-1>, |+1> with
// pump rates I^-(t), I^+(t) on the two legs:
//
//   dNe/dt  = -(G0 + gt) Ne + I^-(N-1 - Ne) + I^+(N+1 - Ne)
//   dN-1/dt = gt S/2 + G0/2 Ne - gt N-1 - I^-(N-1 - Ne)
//   dN+1/dt = gt S/2 + G0/2 Ne - gt N+1 - I^+(N+1 - Ne)
//
// S = Ne + N-1 + N+1 is conserved and normalised to 1: atoms entering the
// beams arrive with half the population in each ground level. Inversions
// w = Ne - N+-1 are reported relative to that unpumped ground population
// (i.e. 2 (Ne - N+-1)), which makes w = -1 for an unpumped sample.
namespace cpo::rate {

struct PopulationState {
  double n_e = 0.0;
  double n_m1 = 0.5;
  double n_p1 = 0.5;

  double total() const { return n_e + n_m1 + n_p1; }
  /// 2 (Ne - N_leg)
  double inversion(Leg leg) const;
};

struct HarmonicInversion {
  double w0 = 0.0;
  cdouble w1_minus{};
  cdouble w1_plus{};
};

/// The two Lorentzian contributions to the first-harmonic inversion for the
/// drive at detuning drive.delta, before the -w0/2 prefactor:
/// broad = 3 (i1- + i1+) / (G0 + gt + 3 i0 - i delta),
/// narrow = (i1- - i1+) / (gt + i0 - i delta).
struct HarmonicTerms {
  cdouble broad{};
  cdouble narrow{};
};

/// -(G0 + gt) / (G0 + gt + 3 i0). Throws ValidationError for i0 < 0.
double dc_inversion(const SystemParams& p, double i0);

HarmonicTerms harmonic_terms(const SystemParams& p, const FieldDrive& drive);

/// w1^- = -(w0/2)(broad + narrow), w1^+ = -(w0/2)(broad - narrow).
HarmonicInversion first_harmonics(const SystemParams& p, const FieldDrive& drive);

/// Optical depth giving the 27% weak-probe transmission.
double default_optical_depth();

/// Thin-medium probe transmission of the rate model. The probe sees the dc
/// inversion plus the in-phase part of the inversion harmonic on its leg,
/// referred to the probe amplitude: w_eff = w0 + Re[w1_leg * i0 / i1_leg]
/// (sideband-power weighted over the probe-carrying legs). Transmission is
/// the Beer-Lambert law linearised about the dc saturated value,
/// T = T_dc (1 + OD (w_eff - w0)), T_dc = exp(OD w0). Reduced absorption
/// shows up as a transmission peak. The drive's delta is ignored; the
/// spectrum is sampled on `deltas`.
SpectrumTrace rate_spectrum(const SystemParams& p, const FieldDrive& drive_template,
                            std::span<const double> deltas,
                            double optical_depth = default_optical_depth());

/// Pump rates per leg as functions of time (s).
struct LegIntensities {
  std::function<double(double)> minus;
  std::function<double(double)> plus;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<PopulationState> states;
};

/// Integrates the rate equations from `initial` at sample_times[0] and
/// records the state at every sample time.
Trajectory integrate_populations(const SystemParams& p, const LegIntensities& intensities,
                                 const PopulationState& initial,
                                 std::span<const double> sample_times,
                                 const ode::IntegratorOptions& options = {});

/// Pump rates i0 + 2 Re(i1 e^{-i delta t}) on each leg.
LegIntensities modulated_intensities(const FieldDrive& drive);

}  // namespace cpo::rate
