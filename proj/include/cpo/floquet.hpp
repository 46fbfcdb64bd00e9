#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpo/lambda_model.hpp"
#include "cpo/linalg.hpp"
#include "cpo/quadrature.hpp"

// First-order Floquet solution of the three-level optical Bloch equations.
//
// Basis |e>, |-1>, |+1> (indices 0, 1, 2). In the frame rotating at the
// coupling frequency the density matrix is expanded as
//   rho(t) = rho0 + rho_plus e^{-i delta t} + rho_minus e^{+i delta t},
// with the probe entering as V_plus = -1/2 sum_g Omega_P^g |e><g| (and its
// adjoint V_minus). Second harmonics are truncated; the dc block keeps the
// probe back-action terms [V_plus, rho_minus] + [V_minus, rho_plus].
//
// Relaxation: |e> decays at Gamma0 (Gamma0/2 into each ground level), every
// level leaves the beam at gamma_t and is replaced by a ground population
// split equally between |-1> and |+1>; optical coherences decay at
// gamma_opt, the ground (Raman) coherence at gamma_t.
namespace cpo::floquet {

inline constexpr std::size_t levels = 3;
inline constexpr std::size_t level_e = 0;
inline constexpr std::size_t level_m = 1;
inline constexpr std::size_t level_p = 2;
inline constexpr std::size_t unknowns = 27;

enum class Harmonic : std::size_t { dc = 0, plus = 1, minus = 2 };

constexpr std::size_t index(Harmonic h, std::size_t i, std::size_t j) {
  return 9 * static_cast<std::size_t>(h) + 3 * i + j;
}

/// Conditions seen by one velocity class at one position in the cell.
struct LocalConditions {
  double z = 0.0;                // cm
  double velocity_offset = 0.0;  // Doppler shift of both laser frequencies, rad/s
  double ground_shift = 0.0;     // Delta_Z(z)
  double excited_shift = 0.0;    // Zeeman shift of |e> (zero if disabled)
  double delta = 0.0;            // coupling-probe detuning
  double coupling_detuning = 0.0;

  /// Energy of |e> in the coupling frame: excited_shift - coupling_detuning - velocity_offset.
  double excited_energy() const;
  /// One-photon detuning of the coupling on a leg (laser minus transition).
  double coupling_one_photon(Leg leg) const;
  /// One-photon detuning of the probe on a leg.
  double probe_one_photon(Leg leg) const;
  /// Two-photon detuning delta - 2 Delta_Z for probe on |-1>, coupling on |+1>.
  /// Independent of the velocity class.
  double raman_detuning() const { return delta - 2.0 * ground_shift; }
};

LocalConditions local_conditions(const MagneticEnvironment& env, const FieldDrive& drive,
                                 double z, double velocity_offset = 0.0,
                                 bool include_excited_shift = true);

struct FloquetSystem {
  la::Matrix matrix{unknowns};
  std::vector<cdouble> rhs = std::vector<cdouble>(unknowns);
};

/// Builds the 27x27 system. In every harmonic block the |e><e| equation is
/// replaced by the trace condition (1 for dc, 0 for the sidebands). The
/// system is scaled by 1/Gamma0.
FloquetSystem assemble_floquet_system(const SystemParams& params, const FieldDrive& drive,
                                      const LocalConditions& local);

struct BlochHarmonics {
  // rho[h][i][j]
  std::array<std::array<std::array<cdouble, levels>, levels>, levels> rho{};

  cdouble& at(Harmonic h, std::size_t i, std::size_t j) {
    return rho[static_cast<std::size_t>(h)][i][j];
  }
  const cdouble& at(Harmonic h, std::size_t i, std::size_t j) const {
    return rho[static_cast<std::size_t>(h)][i][j];
  }

  /// max |rho_k(i,j) - conj(rho_-k(j,i))| relative to the largest element.
  double hermiticity_error() const;
  /// max(|tr rho0 - 1|, |tr rho_plus|, |tr rho_minus|).
  double trace_error() const;
};

/// Solves an assembled system. Throws NumericError("singular_system").
BlochHarmonics solve(const FloquetSystem& system, la::SolveReport* report = nullptr);

/// Complex probe response 4 gamma_opt sum_g conj(Omega_P^g) rho_plus(e,g) /
/// sum_g |Omega_P^g|^2. A resonant unsaturated two-level line gives i; the
/// imaginary part is the absorption.
cdouble probe_response(const SystemParams& params, Polarization pol, const BlochHarmonics& h);

/// assemble + solve + probe_response. Returns 0 when Omega_P = 0.
cdouble solve_local_susceptibility(const SystemParams& params, const FieldDrive& drive,
                                   const LocalConditions& local);

struct FloquetOptions {
  quad::VelocitySpec velocity;
  std::size_t z_nodes = 65;
  bool include_excited_shift = true;
  // Optical depth scale chosen so that T = calibration_transmission with the
  // coupling off at delta = 0. Without calibration `optical_depth_scale` is used
  // directly: T = exp(-scale * <Im chi>).
  std::optional<double> calibration_transmission = 0.27;
  double optical_depth_scale = 1.0;
  unsigned workers = 1;
  // Repeat every Doppler average with spec.doubled() and fail when the
  // result moves by more than convergence_tolerance.
  bool check_convergence = false;
  double convergence_tolerance = 5e-3;
};

/// Doppler-averaged probe response at position z.
cdouble doppler_average(const SystemParams& params, const FieldDrive& drive,
                        const MagneticEnvironment& env, double z,
                        const quad::VelocitySpec& spec, bool include_excited_shift = true);

/// Like doppler_average but also evaluates the doubled rule and throws
/// NumericError("quadrature_not_converged") if the two differ by more than
/// `tolerance` relative. `change` receives the relative difference.
cdouble doppler_average_checked(const SystemParams& params, const FieldDrive& drive,
                                const MagneticEnvironment& env, double z,
                                const quad::VelocitySpec& spec, bool include_excited_shift,
                                double tolerance, double* change = nullptr);

/// Optical-depth scale so that the weak-probe, coupling-off transmission at
/// delta = 0 equals `transmission`.
double calibrate_optical_depth(const SystemParams& params, const FieldDrive& drive,
                               const MagneticEnvironment& env, const FloquetOptions& options,
                               double transmission);

/// Cell-averaged Im chi at each delta (the exponent before scaling).
std::vector<double> mean_absorption(const SystemParams& params, const FieldDrive& drive,
                                    const MagneticEnvironment& env,
                                    std::span<const double> deltas, const FloquetOptions& options);

/// T(delta) = exp(-kappa * mean_z Im chi(delta, z)).
SpectrumTrace transmission_spectrum(const SystemParams& params, const FieldDrive& drive,
                                    const MagneticEnvironment& env,
                                    std::span<const double> deltas, const FloquetOptions& options);

struct GradientSweepOptions {
  // Keep the field at the cell centre fixed while the gradient changes, so
  // the mean EIT position does not move.
  bool hold_center_field = true;
  double half_window = 2.0 * 3.141592653589793 * 0.25e6;  // rad/s around each peak
  std::size_t window_points = 101;
};

struct GradientPoint {
  double db_dz = 0.0;  // G/cm
  double cpo_fwhm = 0.0;
  double eit_fwhm = 0.0;
  double cpo_height = 0.0;
  double eit_height = 0.0;
  bool ok = false;
  std::string message;
};

/// Fits the CPO (delta = 0) and EIT (delta = 2 Delta_Z at the mean field)
/// peaks at each gradient. A failed point is reported with ok = false and
/// the sweep continues.
std::vector<GradientPoint> linewidth_vs_gradient(const SystemParams& params,
                                                 const FieldDrive& drive,
                                                 const MagneticEnvironment& env,
                                                 std::span<const double> gradients,
                                                 const FloquetOptions& options,
                                                 const GradientSweepOptions& sweep = {});

/// Environment for one sweep point.
MagneticEnvironment with_gradient(const MagneticEnvironment& env, double db_dz,
                                  bool hold_center_field);

}  // namespace cpo::floquet
