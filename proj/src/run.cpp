#include "cpo/run.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <limits>

#include "cpo/analysis.hpp"
#include "cpo/floquet.hpp"
#include "cpo/io.hpp"
#include "cpo/kernels.hpp"
#include "cpo/memory.hpp"
#include "cpo/rate_eq.hpp"
#include "cpo/units.hpp"

namespace cpo::run {
namespace {

namespace fs = std::filesystem;

struct Context {
  config::RunConfig cfg;   // as executed
  config::RunConfig echo;  // as echoed and hashed; thread count is not part of it
  std::string hash;
  RunOptions opt;
};

Context prepare(config::RunConfig cfg, const RunOptions& opt) {
  if (opt.model) cfg.run.model = *opt.model;
  cfg.resolve();
  Context c{cfg, cfg, config::config_hash(cfg), opt};
  if (opt.workers) c.cfg.run.workers = std::max(1u, *opt.workers);
  return c;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

io::CsvWriter header(const Context& c, std::string_view command) {
  io::CsvWriter w;
  w.meta("tool", "cposim " + std::string(version));
  w.meta("command", command);
  w.meta("config_hash", c.hash);
  w.meta("kernel_isa", kernels::to_string(kernels::active_isa()));
  if (!c.opt.reproducible) w.meta("generated", utc_timestamp());
  return w;
}

fs::path emit(const Context& c, const std::string& name, const std::string& text,
              RunResult& result) {
  const fs::path path = c.opt.out_dir / name;
  io::write_file(path, text);
  result.files.push_back(path);
  return path;
}

void echo_config(const Context& c, RunResult& result) {
  emit(c, "config.resolved.ini", config::render(c.echo), result);
}

std::string tag(double gradient_mg_per_cm) { return io::format_double(gradient_mg_per_cm) + "mGcm"; }

SystemParams checked_params(const config::RunConfig& cfg, std::ostream& log) {
  const SystemParams p = cfg.system_params();
  const FieldDrive d = make_drive(p, cfg.drive.polarization, 0.0,
                                  units::from_mhz(cfg.drive.coupling_detuning_mhz));
  const ValidationResult v = validate(p, d);
  for (const auto& diag : v.diagnostics)
    if (diag.severity == Severity::warning) log << "warning: " << diag.code << ": " << diag.message << "\n";
  if (!v.ok()) throw ValidationError(v.diagnostics);
  return p;
}

void trace_meta(io::CsvWriter& w, const SpectrumTrace& t, const FieldDrive& d) {
  w.meta("model", to_string(t.model));
  w.meta("polarization", to_string(d.polarization));
  w.meta("velocity_nodes", static_cast<double>(t.velocity_nodes));
  w.meta("z_nodes", static_cast<double>(t.z_nodes));
}

void trace_rows(io::CsvWriter& w, const SpectrumTrace& t) {
  w.columns({"delta_MHz", "transmission"});
  for (std::size_t k = 0; k < t.deltas.size(); ++k)
    w.row({units::to_mhz(t.deltas[k]), t.transmission[k]});
}

}  // namespace

RunResult run_spectrum(config::RunConfig cfg_in, const RunOptions& opt, std::ostream& log) {
  const Context c = prepare(std::move(cfg_in), opt);
  const SystemParams p = checked_params(c.cfg, log);
  const FieldDrive d = make_drive(p, c.cfg.drive.polarization, 0.0,
                                  units::from_mhz(c.cfg.drive.coupling_detuning_mhz));
  const auto deltas = c.cfg.deltas();
  RunResult result;

  if (c.cfg.run.model == ModelKind::rate) {
    const double od = c.cfg.calibration.enabled ? -std::log(c.cfg.calibration.transmission)
                                                : c.cfg.calibration.optical_depth_scale;
    const SpectrumTrace t = rate::rate_spectrum(p, d, deltas, od);
    io::CsvWriter w = header(c, "spectrum");
    trace_meta(w, t, d);
    w.meta("optical_depth", od);
    w.meta("i0_per_s", d.i0);
    trace_rows(w, t);
    const auto path = emit(c, "spectrum_rate_" + std::string(to_string(d.polarization)) + ".csv",
                           w.text(), result);
    log << "wrote " << path.string() << "\n";
  } else {
    const auto opts = c.cfg.floquet_options();
    for (double g : c.cfg.magnetic.gradients_mg_per_cm) {
      const MagneticEnvironment env = c.cfg.environment(g);
      const double kappa =
          opts.calibration_transmission
              ? floquet::calibrate_optical_depth(p, d, env, opts, *opts.calibration_transmission)
              : opts.optical_depth_scale;
      floquet::FloquetOptions o = opts;
      o.calibration_transmission.reset();
      o.optical_depth_scale = kappa;
      const SpectrumTrace t = floquet::transmission_spectrum(p, d, env, deltas, o);
      io::CsvWriter w = header(c, "spectrum");
      trace_meta(w, t, d);
      w.meta("db_dz_mG_per_cm", g);
      w.meta("b0_G", env.b0);
      w.meta("optical_depth_scale", kappa);
      trace_rows(w, t);
      const auto path = emit(c,
                             "spectrum_floquet_" + std::string(to_string(d.polarization)) + "_" +
                                 tag(g) + ".csv",
                             w.text(), result);
      log << "wrote " << path.string() << "\n";
    }
  }
  echo_config(c, result);
  return result;
}

RunResult run_memory(config::RunConfig cfg_in, const RunOptions& opt, std::ostream& log) {
  const Context c = prepare(std::move(cfg_in), opt);
  const SystemParams p = checked_params(c.cfg, log);
  const memory::PulseSequence seq = c.cfg.pulse_sequence();
  const memory::MemoryOptions mopt = c.cfg.memory_options();
  std::vector<double> ts;
  for (double t : c.cfg.sequence.storage_times_us) ts.push_back(units::from_us(t));
  RunResult result;

  for (double g : c.cfg.magnetic.gradients_mg_per_cm) {
    const MagneticEnvironment env = c.cfg.environment(g);
    for (MemoryKind mk : c.cfg.sequence.memories) {
      const FieldDrive d =
          memory::memory_drive(p, env, mk, units::from_mhz(c.cfg.drive.coupling_detuning_mhz));
      const memory::StorageSimulator sim(p, d, env, seq, mk, mopt);
      DecayCurve curve;
      curve.memory = mk;
      for (double t : ts) {
        curve.storage_times.push_back(t);
        curve.amplitudes.push_back(sim.retrieve(t).peak);
      }
      curve.check();

      io::CsvWriter w = header(c, "memory");
      w.meta("memory", to_string(mk));
      w.meta("polarization", to_string(d.polarization));
      w.meta("delta_MHz", units::to_mhz(d.delta));
      w.meta("db_dz_mG_per_cm", g);
      w.meta("b0_G", env.b0);
      w.meta("inverse_gamma_t_us", units::to_us(1.0 / p.gamma_t));
      std::size_t positive = 0;
      for (double a : curve.amplitudes) positive += a > 0.0 ? 1 : 0;
      if (positive >= 4) {
        const auto f = analysis::fit_exponential(curve);
        w.meta("fit", f.converged ? "converged" : "not_converged");
        w.meta("tau_us", units::to_us(f.tau));
        w.meta("fit_amplitude", f.amplitude);
        w.meta("fit_residual", f.residual_norm);
        log << to_string(mk) << " memory, " << io::format_double(g)
            << " mG/cm: tau = " << io::format_double(units::to_us(f.tau)) << " us\n";
      } else {
        w.meta("fit", "insufficient_points");
      }
      w.columns({"t_s_us", "amplitude", "kernel_decay"});
      for (std::size_t k = 0; k < ts.size(); ++k) {
        const double kd = std::abs(memory::eit_dephasing_kernel(env, ts[k])) * std::exp(-p.gamma_t * ts[k]);
        w.row({units::to_us(ts[k]), curve.amplitudes[k], kd});
      }
      const std::string base = std::string(to_string(mk)) + "_" + tag(g);
      emit(c, "decay_" + base + ".csv", w.text(), result);

      for (double tp_us : c.cfg.sequence.pulse_storage_times_us) {
        const memory::RetrievedPulse pulse = sim.retrieve(units::from_us(tp_us));
        io::CsvWriter pw = header(c, "memory");
        pw.meta("memory", to_string(mk));
        pw.meta("db_dz_mG_per_cm", g);
        pw.meta("storage_time_us", tp_us);
        pw.meta("peak", pulse.peak);
        pw.columns({"t_us", "signal", "field_re", "field_im"});
        for (std::size_t k = 0; k < pulse.times.size(); ++k)
          pw.row({units::to_us(pulse.times[k]), pulse.signal[k], pulse.field[k].real(),
                  pulse.field[k].imag()});
        emit(c, "pulse_" + base + "_ts" + io::format_double(tp_us) + "us.csv", pw.text(), result);
      }
    }
  }
  echo_config(c, result);
  return result;
}

RunResult run_sweep(config::RunConfig cfg_in, const RunOptions& opt, std::ostream& log) {
  const Context c = prepare(std::move(cfg_in), opt);
  if (c.cfg.run.model != ModelKind::floquet)
    throw ValidationError("sweep_needs_floquet", "the gradient sweep needs model = floquet");
  const SystemParams p = checked_params(c.cfg, log);
  const FieldDrive d = make_drive(p, c.cfg.drive.polarization, 0.0,
                                  units::from_mhz(c.cfg.drive.coupling_detuning_mhz));
  std::vector<double> grads;
  for (double g : c.cfg.magnetic.gradients_mg_per_cm) grads.push_back(units::from_mg_per_cm(g));
  floquet::GradientSweepOptions sw;
  // environment() already applies the field reference.
  sw.hold_center_field = c.cfg.magnetic.field_reference == config::FieldReference::center;
  sw.half_window = units::from_mhz(c.cfg.run.sweep_half_window_mhz);
  sw.window_points = c.cfg.run.sweep_window_points;
  const MagneticEnvironment base = c.cfg.environment(0.0);
  const auto points = floquet::linewidth_vs_gradient(p, d, base, grads, c.cfg.floquet_options(), sw);

  io::CsvWriter w = header(c, "sweep");
  w.meta("polarization", to_string(d.polarization));
  w.meta("field_G", c.cfg.magnetic.field_g);
  w.meta("field_reference", config::to_string(c.cfg.magnetic.field_reference));
  std::vector<double> gx, eit, cpo;
  for (const auto& pt : points) {
    if (!pt.ok) continue;
    gx.push_back(units::to_mg_per_cm(pt.db_dz));
    eit.push_back(units::to_mhz(pt.eit_fwhm));
    cpo.push_back(units::to_mhz(pt.cpo_fwhm));
  }
  w.meta("geometric_slope_MHz_per_mG_per_cm",
         2.0 * std::abs(c.cfg.magnetic.zeeman_ground_mhz_per_g) * c.cfg.magnetic.cell_length_cm * 1e-3);
  if (gx.size() >= 3) {
    const auto lf = analysis::linear_fit(gx, eit);
    w.meta("eit_slope_MHz_per_mG_per_cm", lf.slope);
    w.meta("eit_intercept_MHz", lf.intercept);
    w.meta("eit_r2", lf.r2);
    if (d.polarization == Polarization::lin_perp_lin) {
      const auto [lo, hi] = std::minmax_element(cpo.begin(), cpo.end());
      w.meta("cpo_width_max_over_min", *hi / *lo);
    }
  }
  w.columns({"db_dz_mG_per_cm", "cpo_fwhm_MHz", "eit_fwhm_MHz", "cpo_height", "eit_height", "ok"});
  for (const auto& pt : points) {
    w.row({units::to_mg_per_cm(pt.db_dz), units::to_mhz(pt.cpo_fwhm), units::to_mhz(pt.eit_fwhm),
           pt.cpo_height, pt.eit_height, pt.ok ? 1.0 : 0.0});
    if (!pt.ok)
      log << "gradient " << io::format_double(units::to_mg_per_cm(pt.db_dz))
          << " mG/cm: " << pt.message << "\n";
  }
  RunResult result;
  const auto path =
      emit(c, "linewidths_" + std::string(to_string(d.polarization)) + ".csv", w.text(), result);
  log << "wrote " << path.string() << "\n";
  echo_config(c, result);
  return result;
}

std::string_view to_string(FitKind k) {
  switch (k) {
    case FitKind::lorentzian: return "lorentzian";
    case FitKind::exponential: return "exponential";
    case FitKind::linear: return "linear";
  }
  return "unknown";
}

FitKind parse_fit_kind(std::string_view s) {
  if (s == "lorentzian") return FitKind::lorentzian;
  if (s == "exponential") return FitKind::exponential;
  if (s == "linear") return FitKind::linear;
  throw ValidationError("unknown_fit", "unknown fit model '" + std::string(s) + "'");
}

RunResult run_fit(const std::filesystem::path& input, FitKind kind, const RunOptions& opt,
                  std::ostream& log) {
  const io::Columns cols = io::read_columns(input);
  io::CsvWriter w;
  w.meta("tool", "cposim " + std::string(version));
  w.meta("command", "fit");
  w.meta("input", input.filename().string());
  w.meta("input_hash", io::hash_hex(io::fnv1a64(io::read_file(input))));
  if (!opt.reproducible) w.meta("generated", utc_timestamp());
  std::string report;
  auto kv = [&](std::string_view key, std::string_view value) {
    report += key;
    report += '=';
    report += value;
    report += '\n';
  };
  auto kvd = [&](std::string_view key, double v) { kv(key, io::format_double(v)); };
  kv("model", to_string(kind));
  kvd("points", static_cast<double>(cols.x.size()));

  switch (kind) {
    case FitKind::lorentzian: {
      const auto f = analysis::fit_lorentzian(cols.x, cols.y);
      kvd("center", f.center);
      kvd("fwhm", f.fwhm);
      kvd("amplitude", f.amplitude);
      kvd("offset", f.offset);
      kvd("residual_norm", f.residual_norm);
      kvd("iterations", f.iterations);
      kv("converged", f.converged ? "true" : "false");
      log << "Lorentzian: center " << io::format_double(f.center) << ", FWHM "
          << io::format_double(f.fwhm) << (f.converged ? "" : " (not converged)") << "\n";
      break;
    }
    case FitKind::exponential: {
      const auto f = analysis::fit_exponential(cols.x, cols.y);
      kvd("amplitude", f.amplitude);
      kvd("tau", f.tau);
      kvd("offset", f.offset);
      kvd("residual_norm", f.residual_norm);
      kvd("iterations", f.iterations);
      kv("converged", f.converged ? "true" : "false");
      log << "exponential: tau " << io::format_double(f.tau) << (f.converged ? "" : " (not converged)")
          << "\n";
      break;
    }
    case FitKind::linear: {
      const auto f = analysis::linear_fit(cols.x, cols.y);
      kvd("slope", f.slope);
      kvd("intercept", f.intercept);
      kvd("r2", f.r2);
      kv("converged", "true");
      log << "linear: slope " << io::format_double(f.slope) << ", intercept "
          << io::format_double(f.intercept) << ", r2 " << io::format_double(f.r2) << "\n";
      break;
    }
  }
  RunResult result;
  const fs::path path = opt.out_dir / ("fit_" + std::string(to_string(kind)) + ".txt");
  io::write_file(path, w.text() + report);
  result.files.push_back(path);
  return result;
}

}  // namespace cpo::run
