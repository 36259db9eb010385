#pragma once

#include <iosfwd>
#include <optional>
#include <span>

#include "mmm/clustering.hpp"
#include "mmm/model_io.hpp"
#include "mmm/pareto.hpp"
#include "mmm/search.hpp"

namespace mmm {

struct RunOutput {
  SearchResult search;
  ParetoResult pareto;
  std::optional<ClusterResult> clusters;
  /// Archive index of the front-1 candidate with the lowest scalar.
  std::size_t best = 0;

  const CandidateModel& best_candidate() const { return search.archive[best]; }
};

/// Search, Pareto fronts, optional clustering of the retained candidates and
/// the default pick.
RunOutput run_models(const ModelContext& ctx, const HyperparameterSpace& space, const SearchConfig& cfg,
                     std::ostream* progress = nullptr);

/// One row per listed archive candidate: id, scores, fit metrics, front,
/// cluster, hyperparameters and per-channel efficiency. Rows are ordered by
/// front, then scalar, then archive index.
CsvTable candidates_table(const SearchResult& result, std::span<const std::size_t> rows, DepVarType type);

struct RefreshConfig {
  std::size_t steps = 13;
  int iterations = 1000;
  int trials = 1;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;
  double narrowing = 0.1;
};

/// Everything a refresh search runs against, without the search itself.
struct RefreshSetup {
  DateWindow window;
  HyperparameterSpace space;
  std::vector<double> reference_shares;
  ModelContext context;
  SearchConfig search;
};

/// Window shifted by `steps` periods, bounds narrowed around the exported
/// model's hyperparameters, Decomp.RSSD measured against its effect shares.
/// Lift studies outside the new window are dropped, and with them the
/// MAPE.LIFT weight when none remain.
RefreshSetup prepare_refresh(const ExportedModel& model, const CsvTable& new_data, const HolidayTable& holidays,
                             const RefreshConfig& cfg);

struct RefreshOutput {
  RefreshSetup setup;
  RunOutput run;
};

RefreshOutput refresh_model(const ExportedModel& model, const CsvTable& new_data, const HolidayTable& holidays,
                            const RefreshConfig& cfg, std::ostream* progress = nullptr);

}  // namespace mmm
