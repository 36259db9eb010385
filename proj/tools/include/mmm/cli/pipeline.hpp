#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mmm/cli/config.hpp"
#include "mmm/evaluation.hpp"
#include "mmm/model.hpp"
#include "mmm/model_io.hpp"
#include "mmm/workflow.hpp"

namespace mmm::cli {

struct Inputs {
  MmmDataset dataset;
  HolidayTable holidays;
  std::vector<LiftStudy> studies;
};

/// Built-in public holidays when the config names no holiday file and the
/// holiday component is requested.
HolidayTable resolve_holidays(const std::optional<std::filesystem::path>& path, const std::string& country,
                              const std::vector<Date>& dates);

/// First and last date a refresh by `steps` periods covers.
std::vector<Date> refresh_span(const ExportedModel& model, std::size_t steps);

Inputs load_inputs(const RunConfig& cfg);
ModelContext build_context(const RunConfig& cfg, const Inputs& inputs);
/// Default bounds for the context's channels with the config overrides.
HyperparameterSpace build_space(const RunConfig& cfg, const ModelContext& ctx);

/// Writes archive.json, the CSV exports and, when `plot_pareto` is set, one
/// one-pager directory per Pareto candidate under onepagers/<id>/.
void write_run_outputs(const std::filesystem::path& dir, const ModelContext& ctx, const RunOutput& run,
                       const std::string& csv_out, bool plot_pareto, std::size_t workers);

std::string archive_to_json(const SearchResult& result);
/// Archive records with hyperparameters, scores, front and cluster; fit
/// details are left empty.
std::vector<CandidateModel> archive_from_json(std::string_view text, const HyperparameterSpace& space);

/// Context, space and search settings a run directory was produced with,
/// rebuilt from its manifest.
struct RunState {
  std::filesystem::path dir;
  std::optional<ModelContext> context;
  HyperparameterSpace space;
  SearchConfig search;
};

RunState load_run_state(const std::filesystem::path& run_dir);

/// Exports `id` from the run directory into <run>/models/ and records it as
/// the run's selected model. Returns the written path.
std::filesystem::path select_model(const std::filesystem::path& run_dir, const std::string& id);

/// The model file recorded by select; throws "no selected model" otherwise.
std::filesystem::path selected_model_path(const std::filesystem::path& run_dir);

}  // namespace mmm::cli
