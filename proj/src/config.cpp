#include "cpo/config.hpp"

#include <cctype>
#include <charconv>
#include <functional>
#include <set>
#include <sstream>

#include "cpo/error.hpp"
#include "cpo/io.hpp"
#include "cpo/units.hpp"

namespace cpo::config {

std::string_view to_string(FieldReference r) {
  return r == FieldReference::center ? "center" : "entrance";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw ValidationError("bad_value", std::string(key) + ": expected " + std::string(want) +
                                         ", got '" + std::string(value) + "'");
}

double to_double(std::string_view key, std::string_view v) {
  double d = 0.0;
  if (!io::parse_double(v, d)) bad_value(key, v, "a number");
  return d;
}

std::size_t to_count(std::string_view key, std::string_view v) {
  v = trim(v);
  std::size_t n = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), n);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
    bad_value(key, v, "a nonnegative integer");
  return n;
}

bool to_bool(std::string_view key, std::string_view v) {
  v = trim(v);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  bad_value(key, v, "true or false");
}

std::vector<std::string_view> split_list(std::string_view v) {
  std::vector<std::string_view> out;
  v = trim(v);
  if (v.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t c = v.find(',', pos);
    out.push_back(trim(v.substr(pos, c == std::string_view::npos ? c : c - pos)));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return out;
}

std::vector<double> to_doubles(std::string_view key, std::string_view v) {
  std::vector<double> out;
  for (auto item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += io::format_double(v[i]);
  }
  return s;
}

template <class Fn>
auto wrap_domain(std::string_view key, std::string_view v, Fn&& fn) {
  try {
    return fn(trim(v));
  } catch (const ValidationError&) {
    bad_value(key, v, "a known value");
  }
}

struct Field {
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

using Table = std::vector<std::pair<std::string, std::vector<std::pair<std::string, Field>>>>;

using Entry = std::pair<std::string, Field>;

template <class S>
Entry num(const char* key, S RunConfig::*sec, double S::*member) {
  return {key, Field{[=](RunConfig& c, std::string_view v) { (c.*sec).*member = to_double(key, v); },
                     [=](const RunConfig& c) { return io::format_double((c.*sec).*member); }}};
}

template <class S>
Entry count(const char* key, S RunConfig::*sec, std::size_t S::*member) {
  return {key, Field{[=](RunConfig& c, std::string_view v) { (c.*sec).*member = to_count(key, v); },
                     [=](const RunConfig& c) { return std::to_string((c.*sec).*member); }}};
}

template <class S>
Entry flag(const char* key, S RunConfig::*sec, bool S::*member) {
  return {key, Field{[=](RunConfig& c, std::string_view v) { (c.*sec).*member = to_bool(key, v); },
                     [=](const RunConfig& c) { return std::string((c.*sec).*member ? "true" : "false"); }}};
}

const Table& table() {
  static const Table t = {
      {"system",
       {
           num("gamma0_MHz", &RunConfig::system, &SystemParamsOrdinary::gamma0_mhz),
           num("gamma_t_kHz", &RunConfig::system, &SystemParamsOrdinary::gamma_t_khz),
           {"gamma_opt_MHz",
            Field{[](RunConfig& c, std::string_view v) {
                    c.system.gamma_opt_mhz = to_double("gamma_opt_MHz", v);
                  },
                  [](const RunConfig& c) {
                    return io::format_double(c.system.gamma_opt_mhz.value_or(0.5 * c.system.gamma0_mhz));
                  }}},
           num("doppler_hwhm_MHz", &RunConfig::system, &SystemParamsOrdinary::doppler_hwhm_mhz),
           num("omega_c_MHz", &RunConfig::system, &SystemParamsOrdinary::omega_c_mhz),
           num("omega_p_kHz", &RunConfig::system, &SystemParamsOrdinary::omega_p_khz),
       }},
      {"drive",
       {
           {"polarization",
            Field{[](RunConfig& c, std::string_view v) {
                    c.drive.polarization =
                        wrap_domain("polarization", v, [](std::string_view s) { return parse_polarization(s); });
                  },
                  [](const RunConfig& c) { return std::string(to_string(c.drive.polarization)); }}},
           num("coupling_detuning_MHz", &RunConfig::drive, &DriveBlock::coupling_detuning_mhz),
           num("delta_min_MHz", &RunConfig::drive, &DriveBlock::delta_min_mhz),
           num("delta_max_MHz", &RunConfig::drive, &DriveBlock::delta_max_mhz),
           count("delta_points", &RunConfig::drive, &DriveBlock::delta_points),
       }},
      {"magnetic",
       {
           num("field_G", &RunConfig::magnetic, &MagneticBlock::field_g),
           {"field_reference",
            Field{[](RunConfig& c, std::string_view v) {
                    v = trim(v);
                    if (v == "center")
                      c.magnetic.field_reference = FieldReference::center;
                    else if (v == "entrance")
                      c.magnetic.field_reference = FieldReference::entrance;
                    else
                      bad_value("field_reference", v, "center or entrance");
                  },
                  [](const RunConfig& c) { return std::string(to_string(c.magnetic.field_reference)); }}},
           {"gradients_mG_per_cm",
            Field{[](RunConfig& c, std::string_view v) {
                    c.magnetic.gradients_mg_per_cm = to_doubles("gradients_mG_per_cm", v);
                  },
                  [](const RunConfig& c) { return join_doubles(c.magnetic.gradients_mg_per_cm); }}},
           num("cell_length_cm", &RunConfig::magnetic, &MagneticBlock::cell_length_cm),
           num("zeeman_ground_MHz_per_G", &RunConfig::magnetic, &MagneticBlock::zeeman_ground_mhz_per_g),
           num("zeeman_excited_MHz_per_G", &RunConfig::magnetic, &MagneticBlock::zeeman_excited_mhz_per_g),
           flag("include_excited_shift", &RunConfig::magnetic, &MagneticBlock::include_excited_shift),
       }},
      {"quadrature",
       {
           {"velocity_rule",
            Field{[](RunConfig& c, std::string_view v) {
                    c.quadrature.velocity_rule = wrap_domain(
                        "velocity_rule", v, [](std::string_view s) { return quad::parse_velocity_rule(s); });
                  },
                  [](const RunConfig& c) { return std::string(quad::to_string(c.quadrature.velocity_rule)); }}},
           count("velocity_nodes", &RunConfig::quadrature, &QuadratureBlock::velocity_nodes),
           num("velocity_scale_gamma", &RunConfig::quadrature, &QuadratureBlock::velocity_scale_gamma),
           num("velocity_span_sigmas", &RunConfig::quadrature, &QuadratureBlock::velocity_span_sigmas),
           count("z_nodes", &RunConfig::quadrature, &QuadratureBlock::z_nodes),
           flag("check_convergence", &RunConfig::quadrature, &QuadratureBlock::check_convergence),
       }},
      {"calibration",
       {
           flag("enabled", &RunConfig::calibration, &CalibrationBlock::enabled),
           num("transmission", &RunConfig::calibration, &CalibrationBlock::transmission),
           num("optical_depth_scale", &RunConfig::calibration, &CalibrationBlock::optical_depth_scale),
       }},
      {"sequence",
       {
           num("write_duration_us", &RunConfig::sequence, &SequenceBlock::write_duration_us),
           num("read_duration_us", &RunConfig::sequence, &SequenceBlock::read_duration_us),
           num("ramp_time_us", &RunConfig::sequence, &SequenceBlock::ramp_time_us),
           count("read_samples", &RunConfig::sequence, &SequenceBlock::read_samples),
           {"storage_times_us",
            Field{[](RunConfig& c, std::string_view v) {
                    c.sequence.storage_times_us = to_doubles("storage_times_us", v);
                  },
                  [](const RunConfig& c) { return join_doubles(c.sequence.storage_times_us); }}},
           {"pulse_storage_times_us",
            Field{[](RunConfig& c, std::string_view v) {
                    c.sequence.pulse_storage_times_us = to_doubles("pulse_storage_times_us", v);
                  },
                  [](const RunConfig& c) { return join_doubles(c.sequence.pulse_storage_times_us); }}},
           {"memories",
            Field{[](RunConfig& c, std::string_view v) {
                    c.sequence.memories.clear();
                    for (auto item : split_list(v))
                      c.sequence.memories.push_back(
                          wrap_domain("memories", item, [](std::string_view s) { return parse_memory(s); }));
                  },
                  [](const RunConfig& c) {
                    std::string s;
                    for (std::size_t i = 0; i < c.sequence.memories.size(); ++i) {
                      if (i) s += ", ";
                      s += to_string(c.sequence.memories[i]);
                    }
                    return s;
                  }}},
       }},
      {"run",
       {
           {"model",
            Field{[](RunConfig& c, std::string_view v) {
                    c.run.model = wrap_domain("model", v, [](std::string_view s) { return parse_model(s); });
                  },
                  [](const RunConfig& c) { return std::string(to_string(c.run.model)); }}},
           {"workers",
            Field{[](RunConfig& c, std::string_view v) {
                    const std::size_t n = to_count("workers", v);
                    if (n == 0 || n > 1024) bad_value("workers", v, "an integer in [1, 1024]");
                    c.run.workers = static_cast<unsigned>(n);
                  },
                  [](const RunConfig& c) { return std::to_string(c.run.workers); }}},
           num("sweep_half_window_MHz", &RunConfig::run, &RunBlock::sweep_half_window_mhz),
           count("sweep_window_points", &RunConfig::run, &RunBlock::sweep_window_points),
       }},
  };
  return t;
}

const Field* find_field(std::string_view section, std::string_view key) {
  for (const auto& [name, fields] : table()) {
    if (name != section) continue;
    for (const auto& [k, f] : fields)
      if (k == key) return &f;
    return nullptr;
  }
  return nullptr;
}

bool known_section(std::string_view section) {
  for (const auto& entry : table())
    if (entry.first == section) return true;
  return false;
}

}  // namespace

void RunConfig::resolve() {
  if (!system.gamma_opt_mhz) system.gamma_opt_mhz = 0.5 * system.gamma0_mhz;
  if (sequence.storage_times_us.empty())
    sequence.storage_times_us = memory::default_storage_times_us();
  if (sequence.pulse_storage_times_us.empty())
    sequence.pulse_storage_times_us.push_back(sequence.storage_times_us.front());
}

SystemParams RunConfig::system_params() const { return from_ordinary(system); }

std::vector<double> RunConfig::deltas() const {
  std::vector<double> d;
  const std::size_t n = drive.delta_points;
  if (n == 1) {
    d.push_back(units::from_mhz(drive.delta_min_mhz));
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      const double u = static_cast<double>(k) / static_cast<double>(n - 1);
      d.push_back(units::from_mhz(drive.delta_min_mhz + u * (drive.delta_max_mhz - drive.delta_min_mhz)));
    }
  }
  return d;
}

MagneticEnvironment RunConfig::environment(double gradient_mg_per_cm) const {
  MagneticEnvironment env;
  env.cell_length = magnetic.cell_length_cm;
  env.zeeman_ground = magnetic.zeeman_ground_mhz_per_g;
  env.zeeman_excited = magnetic.zeeman_excited_mhz_per_g;
  env.db_dz = units::from_mg_per_cm(gradient_mg_per_cm);
  env.b0 = magnetic.field_reference == FieldReference::center
               ? magnetic.field_g - 0.5 * env.db_dz * env.cell_length
               : magnetic.field_g;
  return env;
}

floquet::FloquetOptions RunConfig::floquet_options() const {
  floquet::FloquetOptions o;
  o.velocity.rule = quadrature.velocity_rule;
  o.velocity.nodes = quadrature.velocity_nodes;
  o.velocity.scale_in_gamma = quadrature.velocity_scale_gamma;
  o.velocity.span_sigmas = quadrature.velocity_span_sigmas;
  o.z_nodes = quadrature.z_nodes;
  o.include_excited_shift = magnetic.include_excited_shift;
  if (calibration.enabled)
    o.calibration_transmission = calibration.transmission;
  else
    o.calibration_transmission.reset();
  o.optical_depth_scale = calibration.optical_depth_scale;
  o.workers = run.workers;
  o.check_convergence = quadrature.check_convergence;
  return o;
}

memory::PulseSequence RunConfig::pulse_sequence() const {
  memory::PulseSequence s;
  s.write_duration = units::from_us(sequence.write_duration_us);
  s.read_duration = units::from_us(sequence.read_duration_us);
  s.ramp_time = units::from_us(sequence.ramp_time_us);
  s.read_samples = sequence.read_samples;
  return s;
}

memory::MemoryOptions RunConfig::memory_options() const {
  memory::MemoryOptions o;
  o.z_nodes = quadrature.z_nodes;
  o.velocity = floquet_options().velocity;
  o.workers = run.workers;
  return o;
}

RunConfig parse(std::string_view text, const std::string& source) {
  RunConfig cfg;
  std::string section;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto fail = [&](const std::string& code, const std::string& msg) {
    std::ostringstream os;
    os << source << ":" << line_no << ": " << msg;
    throw ValidationError(code, os.str());
  };
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      if (line.front() == '[') {
        if (line.back() != ']') fail("syntax_error", "unterminated section header");
        section = std::string(trim(line.substr(1, line.size() - 2)));
        if (!known_section(section)) fail("unknown_section", "unknown section [" + section + "]");
      } else {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail("syntax_error", "expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (section.empty()) fail("syntax_error", "key '" + key + "' outside a section");
        const Field* f = find_field(section, key);
        if (!f) fail("unknown_key", "unknown key '" + key + "' in [" + section + "]");
        const std::string full = section + "." + key;
        if (!seen.insert(full).second) fail("duplicate_key", "repeated key '" + full + "'");
        try {
          f->set(cfg, value);
        } catch (const ValidationError& e) {
          fail(e.code(), e.what());
        }
      }
    }
    if (end == text.size()) break;
  }
  cfg.resolve();
  return cfg;
}

RunConfig load(const std::filesystem::path& path) { return parse(io::read_file(path), path.string()); }

std::string render(const RunConfig& in) {
  RunConfig cfg = in;
  cfg.resolve();
  std::string out;
  for (const auto& [section, fields] : table()) {
    if (!out.empty()) out += '\n';
    out += "[" + section + "]\n";
    for (const auto& [key, f] : fields) out += key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

std::string config_hash(const RunConfig& cfg) { return io::hash_hex(io::fnv1a64(render(cfg))); }

}  // namespace cpo::config
