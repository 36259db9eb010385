#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmm/allocator.hpp"
#include "mmm/decomposition.hpp"
#include "mmm/model.hpp"
#include "mmm/search.hpp"

namespace mmm {

inline constexpr int kModelSchemaVersion = 1;

struct ExportedChannel {
  ChannelSummary summary;
  Series lag_weights;
  Series spend_history;  // modeling window
};

/// Self-contained description of one selected candidate: enough to rescore
/// it against its dataset, to answer response queries and to seed a refresh.
struct ExportedModel {
  int schema_version = kModelSchemaVersion;
  std::string id;
  std::string dataset_fingerprint;
  Frequency frequency = Frequency::weekly;
  VariableRoles roles;
  DateWindow window;
  std::size_t max_lag = 1;
  DecompositionConfig decomposition;
  SplitPlan split;
  HyperparameterSpace space;
  HyperparameterVector hyperparameters;
  double lambda = 0.0;
  double intercept = 0.0;
  double response_mean = 0.0;
  double response_sd = 1.0;
  std::vector<CoefficientSummary> coefficients;
  std::vector<ExportedChannel> channels;
  std::vector<Date> dates;
  ObjectiveScores scores;
  FitMetrics metrics;
  SearchConfig search;
  std::vector<LiftStudy> lift_studies;
  std::optional<std::vector<double>> reference_effect_shares;
  std::optional<int> pareto_front;
  std::optional<int> cluster;

  const ExportedChannel& channel(std::string_view name) const;
  /// Effect shares of the paid channels, in role order.
  std::vector<double> effect_shares() const;
};

ExportedModel export_candidate(const ModelContext& ctx, const SearchResult& result, std::string_view id);

std::string model_to_json(const ExportedModel& model);
/// Throws InputError on malformed documents or unknown schema versions.
ExportedModel model_from_json(std::string_view text);

std::string model_filename(std::string_view id);
std::filesystem::path save_model(const ExportedModel& model, const std::filesystem::path& dir);
ExportedModel load_model(const std::filesystem::path& path);

ResponseModel response_model(const ExportedModel& model);

/// Rebuilds the pipeline context the model was fitted in.
ModelContext rebuild_context(const ExportedModel& model, const MmmDataset& ds, const HolidayTable& holidays);

struct ImportedModel {
  ExportedModel document;
  CandidateModel rescored;
};

/// Checks the dataset fingerprint (unless overridden) and recomputes the
/// candidate from its stored hyperparameters.
ImportedModel import_model(const std::filesystem::path& path, const MmmDataset& ds,
                           const HolidayTable& holidays, bool override_fingerprint = false);
ImportedModel import_model(const ExportedModel& model, const MmmDataset& ds, const HolidayTable& holidays,
                           bool override_fingerprint = false);

}  // namespace mmm
