#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "mmm/dataset.hpp"
#include "mmm/decomposition.hpp"
#include "mmm/hyperparameters.hpp"
#include "mmm/regression.hpp"
#include "mmm/search.hpp"

namespace mmm::cli {

/// The run configuration file. Keys follow the input-collection, run and
/// output calls of the reference workflow: dt_input, dt_holidays, date_var,
/// dep_var, dep_var_type, prophet_vars, prophet_country, context_vars,
/// paid_media_spends, paid_media_vars, organic_vars, factor_vars,
/// window_start, window_end, adstock, hyperparameters, calibration_input,
/// iterations, trials, ts_validation, train_fraction, optimize_weights,
/// calibration_constraint, min_candidates, clusters, csv_out, plot_pareto,
/// seed, cores. "decomposition" holds the trend/season settings.
struct RunConfig {
  std::filesystem::path dt_input;
  std::optional<std::filesystem::path> dt_holidays;
  VariableRoles roles;
  std::optional<DateWindow> window;
  AdstockFamily adstock = AdstockFamily::geometric;
  /// "<channel>_thetas" etc. and "lambda" to [lower, upper].
  std::map<std::string, Bounds> hyperparameters;
  DecompositionConfig decomposition;  // components and country come from roles
  std::optional<std::filesystem::path> calibration_input;
  SplitPlan split;
  SearchConfig search;
  std::string csv_out = "pareto";  // "pareto", "all" or "" for none
  bool plot_pareto = true;
};

/// Relative paths resolve against `base_dir`. Unknown keys are rejected.
/// Throws InputError("cli", ...).
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
/// Canonical JSON with absolute paths; parse_run_config reads it back.
std::string run_config_to_json(const RunConfig& cfg, int indent = 2);

}  // namespace mmm::cli
