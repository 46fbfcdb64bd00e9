#include "cpo/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cpo/analysis.hpp"
#include "cpo/kernels.hpp"
#include "cpo/parallel.hpp"
#include "cpo/units.hpp"

namespace cpo::floquet {
namespace {

using Op = std::array<std::array<cdouble, levels>, levels>;

constexpr std::size_t ground_level(std::size_t leg) { return leg == 0 ? level_m : level_p; }

double ground_energy(const LocalConditions& c, std::size_t level) {
  return level == level_m ? -c.ground_shift : c.ground_shift;
}

// Adds the coefficients of -i [B, rho_src] to row `row`, for the (i, j)
// element of the equation.
void add_commutator(la::Matrix& m, std::size_t row, std::size_t i, std::size_t j, Harmonic src,
                    const Op& b, double scale) {
  const cdouble mi(0.0, -scale);
  for (std::size_t k = 0; k < levels; ++k) {
    if (b[i][k] != cdouble{}) m(row, index(src, k, j)) += mi * b[i][k];
    if (b[k][j] != cdouble{}) m(row, index(src, i, k)) -= mi * b[k][j];
  }
}

}  // namespace

double LocalConditions::excited_energy() const {
  return excited_shift - coupling_detuning - velocity_offset;
}

double LocalConditions::coupling_one_photon(Leg leg) const {
  return ground_energy(*this, ground_level(static_cast<std::size_t>(leg))) - excited_energy();
}

double LocalConditions::probe_one_photon(Leg leg) const { return delta + coupling_one_photon(leg); }

LocalConditions local_conditions(const MagneticEnvironment& env, const FieldDrive& drive,
                                 double z, double velocity_offset, bool include_excited_shift) {
  const ZeemanShifts s = zeeman_shifts(env, z);
  LocalConditions c;
  c.z = z;
  c.velocity_offset = velocity_offset;
  c.ground_shift = s.ground;
  c.excited_shift = include_excited_shift ? s.excited : 0.0;
  c.delta = drive.delta;
  c.coupling_detuning = drive.coupling_detuning;
  return c;
}

FloquetSystem assemble_floquet_system(const SystemParams& p, const FieldDrive& drive,
                                      const LocalConditions& local) {
  const LegAmplitudes amps = leg_amplitudes(drive.polarization, p.omega_c, p.omega_p);
  Op a{}, vp{}, vm{};
  a[level_e][level_e] = local.excited_energy();
  a[level_m][level_m] = -local.ground_shift;
  a[level_p][level_p] = local.ground_shift;
  for (std::size_t g = 0; g < leg_count; ++g) {
    const std::size_t lv = ground_level(g);
    a[level_e][lv] = -0.5 * amps.coupling[g];
    a[lv][level_e] = std::conj(a[level_e][lv]);
    vp[level_e][lv] = -0.5 * amps.probe[g];
    vm[lv][level_e] = std::conj(vp[level_e][lv]);
  }

  const double s = 1.0 / p.gamma0;
  const double g0 = p.gamma0 * s;
  const double gt = p.gamma_t * s;
  const double gopt = p.gamma_opt * s;
  const double dl = drive.delta * s;

  FloquetSystem sys;
  auto& m = sys.matrix;
  m.fill(cdouble{});
  for (std::size_t h = 0; h < levels; ++h) {
    const auto hh = static_cast<Harmonic>(h);
    const double freq = hh == Harmonic::plus ? dl : (hh == Harmonic::minus ? -dl : 0.0);
    for (std::size_t i = 0; i < levels; ++i) {
      for (std::size_t j = 0; j < levels; ++j) {
        const std::size_t row = index(hh, i, j);
        const std::size_t self = row;
        m(row, self) += cdouble(0.0, freq);
        add_commutator(m, row, i, j, hh, a, s);
        if (hh == Harmonic::dc) {
          add_commutator(m, row, i, j, Harmonic::minus, vp, s);
          add_commutator(m, row, i, j, Harmonic::plus, vm, s);
        } else {
          add_commutator(m, row, i, j, Harmonic::dc, hh == Harmonic::plus ? vp : vm, s);
        }

        // Relaxation.
        if (i == level_e && j == level_e) {
          m(row, self) -= g0 + gt;
        } else if (i == j) {
          m(row, index(hh, level_e, level_e)) += 0.5 * g0;
          m(row, self) -= gt;
          for (std::size_t k = 0; k < levels; ++k) m(row, index(hh, k, k)) += 0.5 * gt;
        } else if (i == level_e || j == level_e) {
          m(row, self) -= gopt;
        } else {
          m(row, self) -= gt;
        }
      }
    }
    // Trace condition replaces the redundant excited-population equation.
    const std::size_t trace_row = index(hh, level_e, level_e);
    for (std::size_t c = 0; c < unknowns; ++c) m(trace_row, c) = 0.0;
    for (std::size_t k = 0; k < levels; ++k) m(trace_row, index(hh, k, k)) = 1.0;
    sys.rhs[trace_row] = hh == Harmonic::dc ? 1.0 : 0.0;
  }
  return sys;
}

double BlochHarmonics::hermiticity_error() const {
  double largest = 0.0;
  for (const auto& h : rho)
    for (const auto& r : h)
      for (const auto& v : r) largest = std::max(largest, std::abs(v));
  if (largest == 0.0) return 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i < levels; ++i) {
    for (std::size_t j = 0; j < levels; ++j) {
      err = std::max(err, std::abs(at(Harmonic::dc, i, j) - std::conj(at(Harmonic::dc, j, i))));
      err = std::max(err,
                     std::abs(at(Harmonic::plus, i, j) - std::conj(at(Harmonic::minus, j, i))));
    }
  }
  return err / largest;
}

double BlochHarmonics::trace_error() const {
  cdouble tr[levels]{};
  for (std::size_t h = 0; h < levels; ++h)
    for (std::size_t k = 0; k < levels; ++k) tr[h] += rho[h][k][k];
  return std::max({std::abs(tr[0] - 1.0), std::abs(tr[1]), std::abs(tr[2])});
}

BlochHarmonics solve(const FloquetSystem& system, la::SolveReport* report) {
  const auto x = la::lu_solve(system.matrix, system.rhs, report);
  BlochHarmonics out;
  for (std::size_t h = 0; h < levels; ++h)
    for (std::size_t i = 0; i < levels; ++i)
      for (std::size_t j = 0; j < levels; ++j)
        out.rho[h][i][j] = x[index(static_cast<Harmonic>(h), i, j)];
  return out;
}

cdouble probe_response(const SystemParams& p, Polarization pol, const BlochHarmonics& h) {
  const LegAmplitudes amps = leg_amplitudes(pol, p.omega_c, p.omega_p);
  cdouble num{};
  double norm = 0.0;
  for (std::size_t g = 0; g < leg_count; ++g) {
    num += std::conj(amps.probe[g]) * h.at(Harmonic::plus, level_e, ground_level(g));
    norm += std::norm(amps.probe[g]);
  }
  if (norm == 0.0) return {};
  return 4.0 * p.gamma_opt * num / norm;
}

cdouble solve_local_susceptibility(const SystemParams& p, const FieldDrive& drive,
                                   const LocalConditions& local) {
  if (p.omega_p == 0.0) return {};
  const FloquetSystem sys = assemble_floquet_system(p, drive, local);
  try {
    return probe_response(p, drive.polarization, solve(sys));
  } catch (const NumericError& e) {
    std::ostringstream os;
    os << e.what() << " at delta/2pi=" << units::to_mhz(drive.delta)
       << " MHz, z=" << local.z << " cm, velocity offset/2pi="
       << units::to_mhz(local.velocity_offset) << " MHz";
    throw NumericError(e.code(), os.str());
  }
}

namespace {

double velocity_centre(const MagneticEnvironment& env, const FieldDrive& drive, double z,
                       bool include_excited_shift) {
  const LocalConditions c = local_conditions(env, drive, z, 0.0, include_excited_shift);
  return c.excited_shift - c.coupling_detuning;
}

cdouble average_with_rule(const SystemParams& p, const FieldDrive& drive,
                          const LocalConditions& base, const quad::Rule& rule,
                          std::vector<cdouble>& scratch) {
  scratch.resize(rule.size());
  LocalConditions c = base;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    c.velocity_offset = rule.nodes[k];
    scratch[k] = solve_local_susceptibility(p, drive, c);
  }
  return kernels::weighted_sum(rule.weights, scratch);
}

quad::Rule velocity_rule_for(const SystemParams& p, const MagneticEnvironment& env,
                             const FieldDrive& drive, double z, const quad::VelocitySpec& spec,
                             bool include_excited_shift) {
  return quad::doppler_rule(spec, p.doppler_hwhm, p.gamma_opt,
                            velocity_centre(env, drive, z, include_excited_shift));
}

double relative_change(cdouble a, cdouble b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

}  // namespace

cdouble doppler_average(const SystemParams& p, const FieldDrive& drive,
                        const MagneticEnvironment& env, double z,
                        const quad::VelocitySpec& spec, bool include_excited_shift) {
  const quad::Rule rule = velocity_rule_for(p, env, drive, z, spec, include_excited_shift);
  std::vector<cdouble> scratch;
  return average_with_rule(p, drive, local_conditions(env, drive, z, 0.0, include_excited_shift),
                           rule, scratch);
}

cdouble doppler_average_checked(const SystemParams& p, const FieldDrive& drive,
                                const MagneticEnvironment& env, double z,
                                const quad::VelocitySpec& spec, bool include_excited_shift,
                                double tolerance, double* change) {
  const cdouble coarse = doppler_average(p, drive, env, z, spec, include_excited_shift);
  const cdouble fine = doppler_average(p, drive, env, z, spec.doubled(), include_excited_shift);
  const double rel = relative_change(coarse, fine);
  if (change) *change = rel;
  if (rel > tolerance) {
    std::ostringstream os;
    os << "velocity quadrature with " << spec.nodes << " nodes changes by " << rel
       << " on doubling (tolerance " << tolerance << "); increase the node count";
    throw NumericError("quadrature_not_converged", os.str());
  }
  return fine;
}

std::vector<double> mean_absorption(const SystemParams& p, const FieldDrive& drive,
                                    const MagneticEnvironment& env,
                                    std::span<const double> deltas,
                                    const FloquetOptions& options) {
  const quad::Rule zr = env.uniform() ? quad::cell_average(1, env.cell_length)
                                      : quad::cell_average(options.z_nodes, env.cell_length);
  const quad::VelocitySpec fine_spec = options.velocity.doubled();
  std::vector<quad::Rule> vrules, vrules_fine;
  std::vector<LocalConditions> bases;
  for (double z : zr.nodes) {
    vrules.push_back(velocity_rule_for(p, env, drive, z, options.velocity,
                                       options.include_excited_shift));
    if (options.check_convergence)
      vrules_fine.push_back(
          velocity_rule_for(p, env, drive, z, fine_spec, options.include_excited_shift));
    bases.push_back(local_conditions(env, drive, z, 0.0, options.include_excited_shift));
  }

  std::vector<double> out(deltas.size());
  parallel_for(deltas.size(), options.workers, [&](std::size_t k) {
    FieldDrive d = drive;
    d.delta = deltas[k];
    std::vector<cdouble> scratch;
    std::vector<double> per_z(zr.size());
    for (std::size_t iz = 0; iz < zr.size(); ++iz) {
      LocalConditions c = bases[iz];
      c.delta = d.delta;
      cdouble chi = average_with_rule(p, d, c, vrules[iz], scratch);
      if (options.check_convergence) {
        const cdouble fine = average_with_rule(p, d, c, vrules_fine[iz], scratch);
        const double rel = std::abs(fine.imag() - chi.imag()) /
                           std::max(std::abs(fine.imag()), 1e-300);
        if (rel > options.convergence_tolerance) {
          std::ostringstream os;
          os << "velocity quadrature with " << options.velocity.nodes
             << " nodes changes the absorption by " << rel << " on doubling at delta/2pi="
             << units::to_mhz(d.delta) << " MHz, z=" << c.z << " cm";
          throw NumericError("quadrature_not_converged", os.str());
        }
        chi = fine;
      }
      per_z[iz] = chi.imag();
    }
    double acc = 0.0;
    for (std::size_t iz = 0; iz < zr.size(); ++iz) acc += zr.weights[iz] * per_z[iz];
    out[k] = acc;
  });
  return out;
}

double calibrate_optical_depth(const SystemParams& p, const FieldDrive& drive,
                               const MagneticEnvironment& env, const FloquetOptions& options,
                               double transmission) {
  if (!(transmission > 0.0 && transmission < 1.0))
    throw ValidationError("calibration_out_of_range",
                          "calibration transmission must lie in (0, 1)");
  SystemParams off = p;
  off.omega_c = 0.0;
  FieldDrive d = drive;
  d.delta = 0.0;
  FloquetOptions o = options;
  o.check_convergence = false;
  const double zero[1] = {0.0};
  const double a = mean_absorption(off, d, env, zero, o)[0];
  if (!(a > 0.0))
    throw NumericError("calibration_failed", "coupling-off absorption is not positive");
  return -std::log(transmission) / a;
}

SpectrumTrace transmission_spectrum(const SystemParams& p, const FieldDrive& drive,
                                    const MagneticEnvironment& env,
                                    std::span<const double> deltas,
                                    const FloquetOptions& options) {
  if (deltas.empty()) throw ValidationError("empty_delta_grid", "delta grid is empty");
  for (std::size_t k = 1; k < deltas.size(); ++k)
    if (!(deltas[k] > deltas[k - 1]))
      throw ValidationError("trace_not_increasing", "delta grid must be strictly increasing");
  const double kappa = options.calibration_transmission
                           ? calibrate_optical_depth(p, drive, env, options,
                                                     *options.calibration_transmission)
                           : options.optical_depth_scale;
  const auto a = mean_absorption(p, drive, env, deltas, options);
  SpectrumTrace t;
  t.model = ModelKind::floquet;
  t.deltas.assign(deltas.begin(), deltas.end());
  t.transmission.resize(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) t.transmission[k] = std::exp(-kappa * a[k]);
  t.velocity_nodes = options.velocity.rule == quad::VelocityRule::single ? 1 : options.velocity.nodes;
  t.z_nodes = env.uniform() ? 1 : options.z_nodes;
  return t;
}

MagneticEnvironment with_gradient(const MagneticEnvironment& env, double db_dz,
                                  bool hold_center_field) {
  MagneticEnvironment out = env;
  out.db_dz = db_dz;
  if (hold_center_field) out.b0 = env.mean_field() - 0.5 * db_dz * env.cell_length;
  return out;
}

std::vector<GradientPoint> linewidth_vs_gradient(const SystemParams& p, const FieldDrive& drive,
                                                 const MagneticEnvironment& env,
                                                 std::span<const double> gradients,
                                                 const FloquetOptions& options,
                                                 const GradientSweepOptions& sweep) {
  if (sweep.window_points < 9)
    throw ValidationError("window_points", "fit windows need at least 9 points");
  auto window = [&](double centre) {
    std::vector<double> d(sweep.window_points);
    const double n = static_cast<double>(sweep.window_points - 1);
    for (std::size_t k = 0; k < d.size(); ++k)
      d[k] = centre - sweep.half_window + 2.0 * sweep.half_window * static_cast<double>(k) / n;
    return d;
  };

  std::vector<GradientPoint> out;
  for (double g : gradients) {
    GradientPoint pt;
    pt.db_dz = g;
    try {
      const MagneticEnvironment e = with_gradient(env, g, sweep.hold_center_field);
      const double eit_centre = 2.0 * units::from_mhz(e.zeeman_ground * e.mean_field());
      const double kappa =
          options.calibration_transmission
              ? calibrate_optical_depth(p, drive, e, options, *options.calibration_transmission)
              : options.optical_depth_scale;
      FloquetOptions o = options;
      o.calibration_transmission.reset();
      o.optical_depth_scale = kappa;

      std::vector<std::string> problems;
      auto fit_at = [&](double centre, bool want, double& fwhm, double& height,
                        const char* name) {
        if (!want) return;
        const auto d = window(centre);
        const SpectrumTrace t = transmission_spectrum(p, drive, e, d, o);
        const auto f = analysis::fit_lorentzian(t.deltas, t.transmission);
        if (!f.converged || f.amplitude <= 0.0) {
          problems.push_back(std::string(name) + " fit did not converge");
          return;
        }
        fwhm = f.fwhm;
        height = f.amplitude;
      };
      const bool has_cpo = drive.polarization == Polarization::lin_perp_lin;
      fit_at(0.0, has_cpo, pt.cpo_fwhm, pt.cpo_height, "CPO");
      fit_at(eit_centre, true, pt.eit_fwhm, pt.eit_height, "EIT");
      pt.ok = problems.empty();
      for (const auto& s : problems) pt.message += (pt.message.empty() ? "" : "; ") + s;
    } catch (const Error& err) {
      pt.ok = false;
      pt.message = err.what();
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace cpo::floquet
