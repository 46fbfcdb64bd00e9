#include "cpo/memory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cpo/parallel.hpp"
#include "cpo/units.hpp"

namespace cpo::memory {
namespace {

using State = StorageSimulator::State;
using Op = std::array<std::array<cdouble, 3>, 3>;
constexpr std::size_t e = 0, m = 1, p = 2;
constexpr std::size_t rho_doubles = 18;

constexpr std::size_t ground_level(std::size_t leg) { return leg == 0 ? m : p; }

enum class Phase { write, dark, read };

// Field gates of one phase of the sequence.
struct Gates {
  Phase phase = Phase::write;
  double ramp = 0.0;
  double read_on = 0.0;

  double coupling(double t) const {
    switch (phase) {
      case Phase::write: return ramp > 0.0 && t > -ramp ? -t / ramp : 1.0;
      case Phase::dark: return 0.0;
      case Phase::read: return ramp > 0.0 ? std::min(1.0, (t - read_on) / ramp) : 1.0;
    }
    return 0.0;
  }
  double probe(double t) const { return phase == Phase::write ? coupling(t) : 0.0; }
};

// Two copies of the Bloch equations: index 0 with the probe, index 1 the
// reference without it.
struct BlochPair {
  Op h0{};
  Op vc{};  // coupling, -1/2 Omega_C |e><g| + h.c.
  Op vp{};  // probe term multiplying e^{-i delta t}
  double gamma0 = 0.0, gamma_t = 0.0, gamma_opt = 0.0, delta = 0.0;
  Gates gates;

  void operator()(const State& x, State& dx, double t) const {
    const double gc = gates.coupling(t);
    const double gp = gates.probe(t);
    const cdouble ph = std::polar(1.0, -delta * t);
    for (std::size_t run = 0; run < 2; ++run) {
      const double* in = x.data() + run * rho_doubles;
      double* out = dx.data() + run * rho_doubles;
      Op r, h;
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
          r[i][j] = cdouble(in[2 * (3 * i + j)], in[2 * (3 * i + j) + 1]);
          h[i][j] = h0[i][j] + gc * vc[i][j];
        }
      if (run == 0 && gp != 0.0) {
        for (std::size_t g = 1; g < 3; ++g) {
          const cdouble v = gp * vp[e][g] * ph;
          h[e][g] += v;
          h[g][e] += std::conj(v);
        }
      }
      Op d{};
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
          cdouble c{};
          for (std::size_t k = 0; k < 3; ++k) c += h[i][k] * r[k][j] - r[i][k] * h[k][j];
          d[i][j] = cdouble(c.imag(), -c.real());  // -i c
        }
      const double trace = r[e][e].real() + r[m][m].real() + r[p][p].real();
      d[e][e] -= (gamma0 + gamma_t) * r[e][e];
      for (std::size_t g = 1; g < 3; ++g) {
        d[g][g] += 0.5 * gamma0 * r[e][e] - gamma_t * r[g][g] + 0.5 * gamma_t * trace;
        d[e][g] -= gamma_opt * r[e][g];
        d[g][e] -= gamma_opt * r[g][e];
      }
      d[m][p] -= gamma_t * r[m][p];
      d[p][m] -= gamma_t * r[p][m];
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
          out[2 * (3 * i + j)] = d[i][j].real();
          out[2 * (3 * i + j) + 1] = d[i][j].imag();
        }
    }
  }
};

cdouble element(const State& x, std::size_t run, std::size_t i, std::size_t j) {
  const std::size_t k = run * rho_doubles + 2 * (3 * i + j);
  return {x[k], x[k + 1]};
}

BlochPair make_pair(const SystemParams& params, const FieldDrive& drive,
                    const MagneticEnvironment& env, double z) {
  const ZeemanShifts s = zeeman_shifts(env, z);
  BlochPair b;
  // Velocity class whose shifted |e> sits at the coupling frequency.
  b.h0[e][e] = 0.0;
  b.h0[m][m] = -s.ground;
  b.h0[p][p] = s.ground;
  const LegAmplitudes amps = leg_amplitudes(drive.polarization, params.omega_c, params.omega_p);
  for (std::size_t g = 0; g < leg_count; ++g) {
    const std::size_t lv = ground_level(g);
    b.vc[e][lv] = -0.5 * amps.coupling[g];
    b.vc[lv][e] = std::conj(b.vc[e][lv]);
    b.vp[e][lv] = -0.5 * amps.probe[g];
  }
  b.gamma0 = params.gamma0;
  b.gamma_t = params.gamma_t;
  b.gamma_opt = params.gamma_opt;
  b.delta = drive.delta;
  return b;
}

State advance(const BlochPair& b, State x, double t0, double t1, const ode::IntegratorOptions& o,
              const std::string& context) {
  if (!(t1 > t0)) return x;
  const double times[2] = {t0, t1};
  State out = x;
  ode::integrate_sampled(b, x, times, [&](std::size_t i, const State& s) { if (i == 1) out = s; },
                         o, context);
  return out;
}

std::string slice_context(double z) {
  std::ostringstream os;
  os << "Bloch equations at z=" << z << " cm";
  return os.str();
}

}  // namespace

void PulseSequence::check(const SystemParams& params) const {
  std::vector<Diagnostic> diags;
  if (!(write_duration >= 0.0 && read_duration >= 0.0 && ramp_time >= 0.0))
    diags.push_back({Severity::error, "negative_duration", "sequence durations must be >= 0"});
  if (params.gamma_t > 0.0 && write_duration < 10.0 / params.gamma_t)
    diags.push_back({Severity::error, "write_too_short",
                     "write_duration must be at least 10/gamma_t to reach the stationary regime"});
  if (ramp_time > write_duration || ramp_time > read_duration)
    diags.push_back({Severity::error, "ramp_too_long", "ramp_time exceeds a pulse duration"});
  if (read_samples < 2)
    diags.push_back({Severity::error, "read_samples", "at least 2 read samples are needed"});
  if (!diags.empty()) throw ValidationError(std::move(diags));
}

FieldDrive memory_drive(const SystemParams& params, const MagneticEnvironment& env,
                        MemoryKind memory, double coupling_detuning) {
  if (memory == MemoryKind::cpo)
    return make_drive(params, Polarization::lin_perp_lin, 0.0, coupling_detuning);
  const double raman = 2.0 * units::from_mhz(env.zeeman_ground * env.mean_field());
  return make_drive(params, Polarization::circ_orthogonal, raman, coupling_detuning);
}

StorageSimulator::StorageSimulator(const SystemParams& params, const FieldDrive& drive,
                                   const MagneticEnvironment& env, const PulseSequence& seq,
                                   MemoryKind memory, const MemoryOptions& options)
    : params_(params), drive_(drive), env_(env), seq_(seq), memory_(memory), options_(options) {
  validated_or_throw(params, drive);
  seq.check(params);
  const Polarization want =
      memory == MemoryKind::cpo ? Polarization::lin_perp_lin : Polarization::circ_orthogonal;
  if (drive.polarization != want)
    throw ValidationError("memory_drive_mismatch",
                          std::string(to_string(memory)) + " memory needs " +
                              std::string(to_string(want)) + " polarisations");

  cell_ = env.uniform() ? quad::cell_average(1, env.cell_length)
                        : quad::cell_average(options.z_nodes, env.cell_length);

  if (options.velocity.rule != quad::VelocityRule::single) {
    const quad::Rule v =
        quad::doppler_rule(options.velocity, params.doppler_hwhm, params.gamma_opt, 0.0);
    cdouble acc{};
    for (std::size_t k = 0; k < v.size(); ++k)
      acc += v.weights[k] * params.gamma_opt / cdouble(params.gamma_opt, -v.nodes[k]);
    readout_ = acc;
  }

  written_.resize(cell_.size());
  parallel_for(cell_.size(), options.workers, [&](std::size_t iz) {
    const double z = cell_.nodes[iz];
    BlochPair b = make_pair(params_, drive_, env_, z);
    b.gates = {Phase::write, seq_.ramp_time, 0.0};
    State x{};
    for (std::size_t run = 0; run < 2; ++run) {
      x[run * rho_doubles + 2 * (3 * m + m)] = 0.5;
      x[run * rho_doubles + 2 * (3 * p + p)] = 0.5;
    }
    const std::string ctx = slice_context(z);
    const double t0 = -seq_.write_duration;
    if (seq_.ramp_time > 0.0) x = advance(b, x, t0, -seq_.ramp_time, options_.ode, ctx);
    x = advance(b, x, seq_.ramp_time > 0.0 ? -seq_.ramp_time : t0, 0.0, options_.ode, ctx);
    // The optical polarisation left by the write fields dephases across the
    // Doppler profile within ~1/W_D; only ground-state order is stored.
    for (std::size_t run = 0; run < 2; ++run)
      for (std::size_t lv : {m, p}) {
        for (std::size_t k : {2 * (3 * e + lv), 2 * (3 * lv + e)}) {
          x[run * rho_doubles + k] = 0.0;
          x[run * rho_doubles + k + 1] = 0.0;
        }
      }
    written_[iz] = x;
  });
}

State StorageSimulator::dark(std::size_t iz, double storage_time) const {
  if (!(storage_time >= 0.0))
    throw ValidationError("negative_duration", "storage time must be >= 0");
  const double z = cell_.nodes[iz];
  BlochPair b = make_pair(params_, drive_, env_, z);
  b.gates = {Phase::dark, 0.0, 0.0};
  return advance(b, written_[iz], 0.0, storage_time, options_.ode, slice_context(z));
}

std::vector<StoredPattern> StorageSimulator::stored_pattern(double storage_time) const {
  std::vector<StoredPattern> out(cell_.size());
  parallel_for(cell_.size(), options_.workers, [&](std::size_t iz) {
    const State x = dark(iz, storage_time);
    StoredPattern s;
    s.z = cell_.nodes[iz];
    s.population_difference = (element(x, 0, m, m) - element(x, 0, p, p)).real() -
                              (element(x, 1, m, m) - element(x, 1, p, p)).real();
    s.raman_coherence = element(x, 0, m, p) - element(x, 1, m, p);
    out[iz] = s;
  });
  return out;
}

RetrievedPulse StorageSimulator::retrieve(double storage_time) const {
  const std::size_t n = seq_.read_samples;
  RetrievedPulse pulse;
  pulse.memory = memory_;
  pulse.storage_time = storage_time;
  pulse.times.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(n - 1);
    pulse.times[k] = seq_.read_duration * u * u;
  }
  const auto channel = probe_channel(drive_.polarization);

  std::vector<std::vector<cdouble>> per_z(cell_.size(), std::vector<cdouble>(n));
  parallel_for(cell_.size(), options_.workers, [&](std::size_t iz) {
    const double z = cell_.nodes[iz];
    const State x = dark(iz, storage_time);
    BlochPair b = make_pair(params_, drive_, env_, z);
    b.gates = {Phase::read, seq_.ramp_time, storage_time};
    std::vector<double> times(n);
    for (std::size_t k = 0; k < n; ++k) times[k] = storage_time + pulse.times[k];
    // Dense output needs distinct sample times.
    for (std::size_t k = 1; k < n; ++k)
      if (!(times[k] > times[k - 1])) times[k] = std::nextafter(times[k - 1], 1.0);
    ode::integrate_sampled(
        b, x, times,
        [&](std::size_t k, const State& s) {
          cdouble acc{};
          for (std::size_t g = 0; g < leg_count; ++g) {
            const std::size_t lv = ground_level(g);
            acc += std::conj(channel[g]) * (element(s, 0, e, lv) - element(s, 1, e, lv));
          }
          per_z[iz][k] = acc;
        },
        options_.ode, slice_context(z));
  });

  pulse.field.assign(n, cdouble{});
  pulse.signal.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    cdouble acc{};
    for (std::size_t iz = 0; iz < cell_.size(); ++iz) acc += cell_.weights[iz] * per_z[iz][k];
    pulse.field[k] = readout_ * acc;
    pulse.signal[k] = std::abs(pulse.field[k]);
    pulse.peak = std::max(pulse.peak, pulse.signal[k]);
  }
  return pulse;
}

RetrievedPulse simulate_storage(const SystemParams& params, const FieldDrive& drive,
                                const MagneticEnvironment& env, const PulseSequence& seq,
                                double storage_time, MemoryKind memory,
                                const MemoryOptions& options) {
  return StorageSimulator(params, drive, env, seq, memory, options).retrieve(storage_time);
}

DecayCurve decay_curve(const SystemParams& params, const FieldDrive& drive,
                       const MagneticEnvironment& env, std::span<const double> storage_times,
                       MemoryKind memory, const PulseSequence& seq, const MemoryOptions& options,
                       std::vector<RetrievedPulse>* pulses) {
  if (storage_times.empty())
    throw ValidationError("empty_storage_grid", "storage-time grid is empty");
  const StorageSimulator sim(params, drive, env, seq, memory, options);
  DecayCurve curve;
  curve.memory = memory;
  for (double ts : storage_times) {
    RetrievedPulse pulse = sim.retrieve(ts);
    curve.storage_times.push_back(ts);
    curve.amplitudes.push_back(pulse.peak);
    if (pulses) pulses->push_back(std::move(pulse));
  }
  curve.check();
  return curve;
}

std::vector<double> default_storage_times_us() {
  std::vector<double> t(8);
  const double lo = std::log(0.2), hi = std::log(12.0);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double v = std::exp(lo + (hi - lo) * static_cast<double>(k) / 7.0);
    const double unit = std::pow(10.0, std::floor(std::log10(v)) - 2.0);
    t[k] = std::round(v / unit) * unit;
  }
  return t;
}

std::vector<double> default_storage_times() {
  std::vector<double> t;
  for (double us : default_storage_times_us()) t.push_back(units::from_us(us));
  return t;
}

cdouble eit_dephasing_kernel(const MagneticEnvironment& env, double storage_time) {
  const double a = 2.0 * units::from_mhz(env.zeeman_ground * env.b0);
  const double b = 2.0 * units::from_mhz(env.zeeman_ground * env.db_dz);
  const double x = b * env.cell_length * storage_time;
  const cdouble base = std::polar(1.0, a * storage_time);
  if (std::abs(x) < 1e-8) return base * cdouble(1.0, 0.5 * x);
  return base * (std::polar(1.0, x) - 1.0) / cdouble(0.0, x);
}

}  // namespace cpo::memory
