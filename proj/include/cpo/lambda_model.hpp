#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpo/error.hpp"

namespace cpo {

using cdouble = std::complex<double>;

// Ground legs of the Lambda system. Index 0 is |-1>, index 1 is |+1>.
enum class Leg : std::size_t { minus = 0, plus = 1 };
inline constexpr std::size_t leg_count = 2;

/// Atomic and field rates, all angular frequencies in rad/s.
///
/// omega_c and omega_p are per-leg Rabi frequencies: the coupling (probe)
/// matrix element on a driven leg is hbar*omega/2.
struct SystemParams {
  double gamma0 = 0.0;        // upper-level population decay
  double gamma_t = 0.0;       // transit decay of the ground levels
  double gamma_opt = 0.0;     // optical coherence decay
  double doppler_hwhm = 0.0;  // Gaussian half width at half maximum
  double omega_c = 0.0;
  double omega_p = 0.0;

  /// Gamma0/2pi = 5.2 MHz, gamma_t/2pi = 40 kHz, Gamma = Gamma0/2,
  /// W_D/2pi = 190 MHz, Omega_C/2pi = 0.4 MHz, Omega_P/2pi = 70 kHz.
  static SystemParams cesium_d2_defaults();
};

/// Same fields in ordinary frequency units, as written in config files.
struct SystemParamsOrdinary {
  double gamma0_mhz = 5.2;
  double gamma_t_khz = 40.0;
  std::optional<double> gamma_opt_mhz;  // defaults to gamma0/2
  double doppler_hwhm_mhz = 190.0;
  double omega_c_mhz = 0.4;
  double omega_p_khz = 70.0;
};

SystemParams from_ordinary(const SystemParamsOrdinary& in);
SystemParamsOrdinary to_ordinary(const SystemParams& p);

enum class Polarization { lin_perp_lin, circ_orthogonal };

std::string_view to_string(Polarization p);
Polarization parse_polarization(std::string_view s);

/// Drive of the rate-equation model plus the detunings shared with the
/// density-matrix model.
struct FieldDrive {
  Polarization polarization = Polarization::lin_perp_lin;
  double delta = 0.0;              // probe minus coupling frequency, rad/s
  double coupling_detuning = 0.0;  // coupling detuning from the B=0 line centre
  double i0 = 0.0;                 // dc pump rate per leg, 1/s
  cdouble i1_minus{};              // first pump-rate sideband on the |-1> leg
  cdouble i1_plus{};               // first pump-rate sideband on the |+1> leg
};

/// Complex Rabi frequency of the coupling and probe on each leg.
struct LegAmplitudes {
  std::array<cdouble, leg_count> coupling{};
  std::array<cdouble, leg_count> probe{};
};

/// lin-perp-lin: coupling on both legs, probe with opposite signs on the two
/// legs. circ-orthogonal: coupling on |+1>, probe on |-1>.
LegAmplitudes leg_amplitudes(Polarization pol, double omega_c, double omega_p);

/// Normalised probe polarisation vector over the legs (detection channel).
std::array<cdouble, leg_count> probe_channel(Polarization pol);

/// Optical pumping rate of a resonant field with per-leg Rabi frequency
/// `omega`: omega^2 / (2 gamma_opt). This is the adiabatic elimination of the
/// optical coherence with matrix element hbar*omega/2, so the rate-equation
/// and density-matrix models describe the same atoms.
double pump_rate_from_rabi(const SystemParams& p, double omega);

/// Builds the rate-equation drive from Rabi frequencies. Sidebands are the
/// coupling-probe beat on each leg, i1 = i0 * Omega_P / Omega_C, zero on legs
/// without both beams.
FieldDrive make_drive(const SystemParams& p, Polarization pol, double delta,
                      double coupling_detuning = 0.0);

/// Uniform field plus a linear gradient along the cell axis.
struct MagneticEnvironment {
  double b0 = 0.0;                // G, field at z = 0
  double db_dz = 0.0;             // G/cm
  double cell_length = 5.0;       // cm
  double zeeman_ground = -0.35;   // MHz/G
  double zeeman_excited = -0.95;  // MHz/G

  double field_at(double z) const { return b0 + db_dz * z; }
  double mean_field() const { return b0 + 0.5 * db_dz * cell_length; }
  bool uniform() const { return db_dz == 0.0; }
};

struct ZeemanShifts {
  double ground = 0.0;   // Delta_Z, rad/s; |-1> sits at -Delta_Z, |+1> at +Delta_Z
  double excited = 0.0;  // shift of |e>, rad/s
};

ZeemanShifts zeeman_shifts(const MagneticEnvironment& env, double z);

enum class ModelKind { rate, floquet };
std::string_view to_string(ModelKind m);
ModelKind parse_model(std::string_view s);

enum class MemoryKind { cpo, eit };
std::string_view to_string(MemoryKind m);
MemoryKind parse_memory(std::string_view s);

/// Probe transmission sampled against the coupling-probe detuning.
struct SpectrumTrace {
  std::vector<double> deltas;        // rad/s, strictly increasing
  std::vector<double> transmission;  // in (0, 1]
  ModelKind model = ModelKind::rate;
  std::size_t velocity_nodes = 0;
  std::size_t z_nodes = 0;

  void check() const;
};

/// Retrieved-pulse peak amplitude against storage time.
struct DecayCurve {
  std::vector<double> storage_times;  // s, strictly increasing
  std::vector<double> amplitudes;     // arbitrary units, >= 0
  MemoryKind memory = MemoryKind::cpo;

  void check() const;
};

struct ValidatedConfig {
  SystemParams params;
  FieldDrive drive;
};

struct ValidationResult {
  std::optional<ValidatedConfig> config;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return config.has_value(); }
  bool has(std::string_view code) const;
};

/// Checks every parameter invariant. Violations are reported as error
/// diagnostics; a weak-probe margin above 0.2*omega_c is only a warning.
ValidationResult validate(const SystemParams& params, const FieldDrive& drive);

/// Throws ValidationError unless `validate` succeeds.
ValidatedConfig validated_or_throw(const SystemParams& params, const FieldDrive& drive);

}  // namespace cpo
