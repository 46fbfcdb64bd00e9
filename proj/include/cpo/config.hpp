#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cpo/floquet.hpp"
#include "cpo/lambda_model.hpp"
#include "cpo/memory.hpp"
#include "cpo/quadrature.hpp"

// Run configuration: a sectioned key = value text file. Units are part of
// the key names. Every key has a default; unknown sections or keys, repeated
// keys and malformed values are validation errors with line numbers.
//
//   [system]       gamma0_MHz gamma_t_kHz gamma_opt_MHz doppler_hwhm_MHz
//                  omega_c_MHz omega_p_kHz
//   [drive]        polarization coupling_detuning_MHz delta_min_MHz
//                  delta_max_MHz delta_points
//   [magnetic]     field_G field_reference gradients_mG_per_cm cell_length_cm
//                  zeeman_ground_MHz_per_G zeeman_excited_MHz_per_G
//                  include_excited_shift
//   [quadrature]   velocity_rule velocity_nodes velocity_scale_gamma
//                  velocity_span_sigmas z_nodes check_convergence
//   [calibration]  enabled transmission optical_depth_scale
//   [sequence]     write_duration_us read_duration_us ramp_time_us
//                  read_samples storage_times_us pulse_storage_times_us
//                  memories
//   [run]          model workers sweep_half_window_MHz sweep_window_points
namespace cpo::config {

enum class FieldReference { center, entrance };

std::string_view to_string(FieldReference r);

struct DriveBlock {
  Polarization polarization = Polarization::lin_perp_lin;
  double coupling_detuning_mhz = 0.0;
  double delta_min_mhz = -1.0;
  double delta_max_mhz = 1.0;
  std::size_t delta_points = 201;
};

struct MagneticBlock {
  double field_g = 0.9;
  // field_G is the field at the cell centre or at the entrance (z = 0).
  FieldReference field_reference = FieldReference::center;
  std::vector<double> gradients_mg_per_cm{0.0};
  double cell_length_cm = 5.0;
  double zeeman_ground_mhz_per_g = -0.35;
  double zeeman_excited_mhz_per_g = -0.95;
  bool include_excited_shift = true;
};

struct QuadratureBlock {
  quad::VelocityRule velocity_rule = quad::VelocityRule::sinh_trapezoid;
  std::size_t velocity_nodes = 129;
  double velocity_scale_gamma = 1.0;
  double velocity_span_sigmas = 6.0;
  std::size_t z_nodes = 65;
  bool check_convergence = false;
};

struct CalibrationBlock {
  bool enabled = true;
  double transmission = 0.27;
  double optical_depth_scale = 1.0;  // used when calibration is disabled
};

struct SequenceBlock {
  double write_duration_us = 100.0;
  double read_duration_us = 10.0;
  double ramp_time_us = 0.0;
  std::size_t read_samples = 400;
  std::vector<double> storage_times_us;        // default: 8 log-spaced points
  std::vector<double> pulse_storage_times_us;  // default: the first storage time
  std::vector<MemoryKind> memories{MemoryKind::cpo, MemoryKind::eit};
};

struct RunBlock {
  ModelKind model = ModelKind::floquet;
  unsigned workers = 1;
  double sweep_half_window_mhz = 0.25;
  std::size_t sweep_window_points = 101;
};

struct RunConfig {
  SystemParamsOrdinary system;
  DriveBlock drive;
  MagneticBlock magnetic;
  QuadratureBlock quadrature;
  CalibrationBlock calibration;
  SequenceBlock sequence;
  RunBlock run;

  /// Fills defaults that depend on other values (gamma_opt, time grids).
  void resolve();

  SystemParams system_params() const;
  std::vector<double> deltas() const;  // rad/s
  MagneticEnvironment environment(double gradient_mg_per_cm) const;
  floquet::FloquetOptions floquet_options() const;
  memory::PulseSequence pulse_sequence() const;
  memory::MemoryOptions memory_options() const;
};

/// Parses configuration text; `source` names the file in diagnostics.
RunConfig parse(std::string_view text, const std::string& source = "<config>");
RunConfig load(const std::filesystem::path& path);

/// Canonical text with every key written out. parse(render(c)) == c.
std::string render(const RunConfig& cfg);

/// FNV-1a hash of the rendered configuration.
std::string config_hash(const RunConfig& cfg);

}  // namespace cpo::config
