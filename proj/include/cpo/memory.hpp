#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cpo/lambda_model.hpp"
#include "cpo/ode.hpp"
#include "cpo/quadrature.hpp"

// Write / store / read light storage in the three-level system.
//
// Coupling and probe are on for write_duration (time runs from
// -write_duration to 0), everything is dark for the storage time, then the
// coupling alone is switched back on. The retrieved signal is the optical
// coherence radiated into the probe polarisation, averaged coherently over
// the cell, after subtraction of an identical sequence without probe.
namespace cpo::memory {

struct PulseSequence {
  double write_duration = 100e-6;  // s
  double read_duration = 10e-6;    // s
  // Linear switching edge; 0 is an ideal step. The write fields ramp down
  // over the last ramp_time of the write window, the read coupling ramps up
  // over the first ramp_time of the read window.
  double ramp_time = 0.0;
  std::size_t read_samples = 400;

  /// Throws ValidationError for negative durations, a write shorter than
  /// 10/gamma_t or fewer than 2 read samples.
  void check(const SystemParams& params) const;
};

struct RetrievedPulse {
  MemoryKind memory = MemoryKind::cpo;
  double storage_time = 0.0;
  std::vector<double> times;   // s, zero at read-on
  std::vector<cdouble> field;  // radiated probe-channel amplitude
  std::vector<double> signal;  // |field|
  double peak = 0.0;
};

struct MemoryOptions {
  std::size_t z_nodes = 65;
  quad::VelocitySpec velocity;  // used for the read-out Doppler factor only
  unsigned workers = 1;
  ode::IntegratorOptions ode;
};

/// Drive for a memory: CPO uses lin-perp-lin at delta = 0, EIT uses
/// circular orthogonal polarisations at delta = 2 Delta_Z of the mean field.
FieldDrive memory_drive(const SystemParams& params, const MagneticEnvironment& env,
                        MemoryKind memory, double coupling_detuning = 0.0);

/// Stored ground-state pattern at one cell position (probe run minus
/// reference run).
struct StoredPattern {
  double z = 0.0;
  double population_difference = 0.0;  // N(-1) - N(+1)
  cdouble raman_coherence{};           // rho(-1, +1)
};

/// Runs the write phase once per cell position and retrieves for any number
/// of storage times.
class StorageSimulator {
 public:
  StorageSimulator(const SystemParams& params, const FieldDrive& drive,
                   const MagneticEnvironment& env, const PulseSequence& seq, MemoryKind memory,
                   const MemoryOptions& options = {});

  RetrievedPulse retrieve(double storage_time) const;
  std::vector<StoredPattern> stored_pattern(double storage_time) const;

  const quad::Rule& cell_rule() const { return cell_; }
  /// sum_v w_v gamma_opt / (gamma_opt - i Delta_v) over the velocity rule,
  /// Delta_v measured from the simulated resonant class.
  cdouble doppler_readout_factor() const { return readout_; }

  using State = std::array<double, 36>;

 private:
  State dark(std::size_t iz, double storage_time) const;

  SystemParams params_;
  FieldDrive drive_;
  MagneticEnvironment env_;
  PulseSequence seq_;
  MemoryKind memory_;
  MemoryOptions options_;
  quad::Rule cell_;
  cdouble readout_{1.0, 0.0};
  std::vector<State> written_;
};

RetrievedPulse simulate_storage(const SystemParams& params, const FieldDrive& drive,
                                const MagneticEnvironment& env, const PulseSequence& seq,
                                double storage_time, MemoryKind memory,
                                const MemoryOptions& options = {});

/// Peak retrieved amplitude for every storage time. Pulses are returned
/// through `pulses` when given.
DecayCurve decay_curve(const SystemParams& params, const FieldDrive& drive,
                       const MagneticEnvironment& env, std::span<const double> storage_times,
                       MemoryKind memory, const PulseSequence& seq = {},
                       const MemoryOptions& options = {},
                       std::vector<RetrievedPulse>* pulses = nullptr);

/// Eight storage times, logarithmic from 0.2 us to 12 us, rounded to three
/// significant digits.
std::vector<double> default_storage_times_us();
std::vector<double> default_storage_times();  // s

/// (1/L) int_0^L exp(i 2 Delta_Z(z) t) dz for the linear field profile.
cdouble eit_dephasing_kernel(const MagneticEnvironment& env, double storage_time);

}  // namespace cpo::memory
