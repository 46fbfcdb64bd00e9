#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cpo/config.hpp"

// Batch drivers behind the command-line subcommands. Each writes its files
// under out_dir, echoes the fully resolved configuration there as
// config.resolved.ini and returns the written paths. Data files are
// byte-identical for identical configurations unless a timestamp line is
// requested (reproducible = false).
namespace cpo::run {

inline constexpr std::string_view version = "1.0.0";

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool reproducible = false;
  std::optional<ModelKind> model;
  std::optional<unsigned> workers;
};

struct RunResult {
  std::vector<std::filesystem::path> files;
};

/// One transmission trace per configured gradient (floquet) or a single
/// trace (rate).
RunResult run_spectrum(config::RunConfig cfg, const RunOptions& opt, std::ostream& log);

/// Decay curve per memory and gradient, plus retrieved-pulse traces for
/// the configured pulse storage times.
RunResult run_memory(config::RunConfig cfg, const RunOptions& opt, std::ostream& log);

/// CPO and EIT linewidths against gradient with a linear fit of the EIT
/// width.
RunResult run_sweep(config::RunConfig cfg, const RunOptions& opt, std::ostream& log);

enum class FitKind { lorentzian, exponential, linear };
std::string_view to_string(FitKind k);
FitKind parse_fit_kind(std::string_view s);

/// Fits a two-column input file and writes fit_<kind>.txt (key=value).
RunResult run_fit(const std::filesystem::path& input, FitKind kind, const RunOptions& opt,
                  std::ostream& log);

}  // namespace cpo::run
