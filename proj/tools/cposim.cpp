#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "cpo/config.hpp"
#include "cpo/error.hpp"
#include "cpo/run.hpp"

namespace {

int exit_code(cpo::ErrorKind k) {
  switch (k) {
    case cpo::ErrorKind::validation: return 2;
    case cpo::ErrorKind::numeric: return 3;
    case cpo::ErrorKind::io: return 4;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra and light-storage simulation for a driven three-level Lambda system"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cpo::run::version));

  std::string config_path;
  std::string out_dir = ".";
  std::optional<unsigned> workers;
  bool reproducible = false;
  std::string model;

  auto common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", config_path, "configuration file (defaults if omitted)");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--workers", workers, "worker threads")->check(CLI::Range(1u, 1024u));
    sub->add_flag("--reproducible", reproducible, "omit the timestamp header line");
  };

  auto* spectrum = app.add_subcommand("spectrum", "probe transmission spectra");
  common(spectrum, true);
  spectrum->add_option("--model", model, "rate or floquet")->check(CLI::IsMember({"rate", "floquet"}));

  auto* memory = app.add_subcommand("memory", "retrieved-pulse decay curves");
  common(memory, true);

  auto* sweep = app.add_subcommand("sweep", "linewidths against magnetic gradient");
  common(sweep, true);
  sweep->add_option("--model", model, "floquet")->check(CLI::IsMember({"rate", "floquet"}));

  std::string input;
  std::string fit_model = "lorentzian";
  auto* fit = app.add_subcommand("fit", "fit a two-column data file");
  common(fit, false);
  fit->add_option("--input", input, "two-column input file")->required();
  fit->add_option("--model", fit_model, "lorentzian, exponential or linear")
      ->check(CLI::IsMember({"lorentzian", "exponential", "linear"}))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    cpo::run::RunOptions opt;
    opt.out_dir = out_dir;
    opt.reproducible = reproducible;
    opt.workers = workers;
    if (!model.empty()) opt.model = cpo::parse_model(model);

    if (fit->parsed()) {
      cpo::run::run_fit(input, cpo::run::parse_fit_kind(fit_model), opt, std::cout);
      return 0;
    }
    const cpo::config::RunConfig cfg =
        config_path.empty() ? cpo::config::parse("", "<defaults>") : cpo::config::load(config_path);
    if (spectrum->parsed())
      cpo::run::run_spectrum(cfg, opt, std::cout);
    else if (memory->parsed())
      cpo::run::run_memory(cfg, opt, std::cout);
    else if (sweep->parsed())
      cpo::run::run_sweep(cfg, opt, std::cout);
    return 0;
  } catch (const cpo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
