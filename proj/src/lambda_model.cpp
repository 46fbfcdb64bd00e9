#include "cpo/lambda_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cpo/units.hpp"

namespace cpo {

namespace {

std::string join_messages(const std::vector<Diagnostic>& diags) {
  std::ostringstream os;
  bool first = true;
  for (const auto& d : diags) {
    if (d.severity != Severity::error) continue;
    if (!first) os << "; ";
    os << d.code << ": " << d.message;
    first = false;
  }
  return os.str();
}

std::string first_code(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::error) return d.code;
  return "validation_failed";
}

}  // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : Error(ErrorKind::validation, first_code(diagnostics), join_messages(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

ValidationError::ValidationError(std::string code, const std::string& message)
    : Error(ErrorKind::validation, code, code + ": " + message),
      diagnostics_{Diagnostic{Severity::error, std::move(code), message}} {}

SystemParams SystemParams::cesium_d2_defaults() { return from_ordinary(SystemParamsOrdinary{}); }

SystemParams from_ordinary(const SystemParamsOrdinary& in) {
  SystemParams p;
  p.gamma0 = units::from_mhz(in.gamma0_mhz);
  p.gamma_t = units::from_khz(in.gamma_t_khz);
  p.gamma_opt = in.gamma_opt_mhz ? units::from_mhz(*in.gamma_opt_mhz) : 0.5 * p.gamma0;
  p.doppler_hwhm = units::from_mhz(in.doppler_hwhm_mhz);
  p.omega_c = units::from_mhz(in.omega_c_mhz);
  p.omega_p = units::from_khz(in.omega_p_khz);
  return p;
}

SystemParamsOrdinary to_ordinary(const SystemParams& p) {
  SystemParamsOrdinary out;
  out.gamma0_mhz = units::to_mhz(p.gamma0);
  out.gamma_t_khz = units::to_khz(p.gamma_t);
  out.gamma_opt_mhz = units::to_mhz(p.gamma_opt);
  out.doppler_hwhm_mhz = units::to_mhz(p.doppler_hwhm);
  out.omega_c_mhz = units::to_mhz(p.omega_c);
  out.omega_p_khz = units::to_khz(p.omega_p);
  return out;
}

std::string_view to_string(Polarization p) {
  return p == Polarization::lin_perp_lin ? "lin_perp_lin" : "circ_orthogonal";
}

Polarization parse_polarization(std::string_view s) {
  if (s == "lin_perp_lin" || s == "linperplin") return Polarization::lin_perp_lin;
  if (s == "circ_orthogonal" || s == "circorthogonal") return Polarization::circ_orthogonal;
  throw ValidationError("unknown_polarization", "unknown polarization '" + std::string(s) + "'");
}

std::string_view to_string(ModelKind m) { return m == ModelKind::rate ? "rate" : "floquet"; }

ModelKind parse_model(std::string_view s) {
  if (s == "rate") return ModelKind::rate;
  if (s == "floquet") return ModelKind::floquet;
  throw ValidationError("unknown_model", "unknown model '" + std::string(s) + "'");
}

std::string_view to_string(MemoryKind m) { return m == MemoryKind::cpo ? "cpo" : "eit"; }

MemoryKind parse_memory(std::string_view s) {
  if (s == "cpo") return MemoryKind::cpo;
  if (s == "eit") return MemoryKind::eit;
  throw ValidationError("unknown_memory", "unknown memory kind '" + std::string(s) + "'");
}

LegAmplitudes leg_amplitudes(Polarization pol, double omega_c, double omega_p) {
  LegAmplitudes amps;
  if (pol == Polarization::lin_perp_lin) {
    amps.coupling = {cdouble(omega_c), cdouble(omega_c)};
    amps.probe = {cdouble(omega_p), cdouble(-omega_p)};
  } else {
    amps.coupling = {cdouble(0.0), cdouble(omega_c)};
    amps.probe = {cdouble(omega_p), cdouble(0.0)};
  }
  return amps;
}

std::array<cdouble, leg_count> probe_channel(Polarization pol) {
  if (pol == Polarization::lin_perp_lin) {
    const double s = 1.0 / std::sqrt(2.0);
    return {cdouble(s), cdouble(-s)};
  }
  return {cdouble(1.0), cdouble(0.0)};
}

double pump_rate_from_rabi(const SystemParams& p, double omega) {
  return omega * omega / (2.0 * p.gamma_opt);
}

FieldDrive make_drive(const SystemParams& p, Polarization pol, double delta,
                      double coupling_detuning) {
  FieldDrive d;
  d.polarization = pol;
  d.delta = delta;
  d.coupling_detuning = coupling_detuning;
  d.i0 = pump_rate_from_rabi(p, p.omega_c);
  const auto amps = leg_amplitudes(pol, p.omega_c, p.omega_p);
  std::array<cdouble, leg_count> i1{};
  for (std::size_t g = 0; g < leg_count; ++g) {
    if (std::abs(amps.coupling[g]) > 0.0)
      i1[g] = d.i0 * amps.probe[g] / amps.coupling[g];
  }
  d.i1_minus = i1[0];
  // Exact negation keeps the antiphase constraint bit-exact.
  d.i1_plus = pol == Polarization::lin_perp_lin ? -i1[0] : i1[1];
  return d;
}

ZeemanShifts zeeman_shifts(const MagneticEnvironment& env, double z) {
  if (!(z >= 0.0 && z <= env.cell_length)) {
    std::ostringstream os;
    os << "position z=" << z << " cm outside the cell [0, " << env.cell_length << "]";
    throw ValidationError("z_out_of_cell", os.str());
  }
  const double b = env.field_at(z);
  return {units::from_mhz(env.zeeman_ground * b), units::from_mhz(env.zeeman_excited * b)};
}

void SpectrumTrace::check() const {
  if (deltas.size() != transmission.size())
    throw ValidationError("trace_shape", "delta and transmission lengths differ");
  for (std::size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] > deltas[i - 1]))
      throw ValidationError("trace_not_increasing", "deltas must be strictly increasing");
  for (double t : transmission)
    if (!(t > 0.0 && t <= 1.0))
      throw ValidationError("transmission_out_of_range", "transmission outside (0, 1]");
}

void DecayCurve::check() const {
  if (storage_times.size() != amplitudes.size())
    throw ValidationError("curve_shape", "storage time and amplitude lengths differ");
  for (std::size_t i = 1; i < storage_times.size(); ++i)
    if (!(storage_times[i] > storage_times[i - 1]))
      throw ValidationError("curve_not_increasing", "storage times must be strictly increasing");
  for (double a : amplitudes)
    if (!(a >= 0.0)) throw ValidationError("negative_amplitude", "amplitudes must be nonnegative");
}

bool ValidationResult::has(std::string_view code) const {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [&](const Diagnostic& d) { return d.code == code; });
}

ValidationResult validate(const SystemParams& params, const FieldDrive& drive) {
  ValidationResult result;
  auto& diags = result.diagnostics;
  auto error = [&](std::string code, std::string msg) {
    diags.push_back({Severity::error, std::move(code), std::move(msg)});
  };
  auto warn = [&](std::string code, std::string msg) {
    diags.push_back({Severity::warning, std::move(code), std::move(msg)});
  };

  const std::pair<const char*, double> rates[] = {
      {"gamma0", params.gamma0},       {"gamma_t", params.gamma_t},
      {"gamma_opt", params.gamma_opt}, {"doppler_hwhm", params.doppler_hwhm},
      {"omega_c", params.omega_c},     {"omega_p", params.omega_p},
  };
  for (const auto& [name, value] : rates)
    if (!(value > 0.0) || !std::isfinite(value))
      error("rate_not_positive", std::string(name) + " must be strictly positive");

  if (!(params.gamma_t < params.gamma0))
    error("transit_not_slow", "gamma_t must be smaller than gamma0");

  if (params.omega_p > params.omega_c)
    error("probe_not_perturbative", "omega_p exceeds omega_c");
  else if (params.omega_p > 0.2 * params.omega_c)
    warn("probe_weak_margin", "omega_p above 0.2*omega_c; first-order expansion degraded");
  if (params.omega_p > 0.2 * params.gamma0)
    warn("probe_vs_gamma0", "omega_p above 0.2*gamma0; first-order expansion degraded");

  if (!(drive.i0 >= 0.0) || !std::isfinite(drive.i0))
    error("pump_rate_negative", "i0 must be nonnegative");
  const double limit = 0.2 * drive.i0;
  if (std::abs(drive.i1_minus) > limit || std::abs(drive.i1_plus) > limit)
    error("sideband_not_perturbative", "|i1| must not exceed 0.2*i0");

  if (drive.polarization == Polarization::lin_perp_lin && drive.i1_plus != -drive.i1_minus)
    error("antiphase_constraint_violated", "lin_perp_lin requires i1_plus == -i1_minus");

  if (!std::isfinite(drive.delta) || !std::isfinite(drive.coupling_detuning))
    error("detuning_not_finite", "detunings must be finite");

  const bool failed = std::any_of(diags.begin(), diags.end(),
                                  [](const Diagnostic& d) { return d.severity == Severity::error; });
  if (!failed) result.config = ValidatedConfig{params, drive};
  return result;
}

ValidatedConfig validated_or_throw(const SystemParams& params, const FieldDrive& drive) {
  auto result = validate(params, drive);
  if (!result.ok()) throw ValidationError(std::move(result.diagnostics));
  return *result.config;
}

}  // namespace cpo
