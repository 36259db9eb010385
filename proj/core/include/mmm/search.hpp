#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mmm/evaluation.hpp"
#include "mmm/hyperparameters.hpp"
#include "mmm/model.hpp"

namespace mmm {

struct SearchConfig {
  static constexpr int population = 32;
  static constexpr double mutation = 0.8;
  static constexpr double crossover = 0.9;

  int iterations = 2000;  // evaluations per trial
  int trials = 5;
  std::uint64_t seed = 1;
  ObjectiveWeights weights;
  double calibration_constraint = 0.1;
  std::size_t min_candidates = 100;
  bool clusters = true;
  /// Parallel evaluations; 0 means available parallelism - 1 (at least 1).
  std::size_t workers = 0;

  void validate() const;
  std::size_t resolved_workers() const;
  bool operator==(const SearchConfig&) const = default;
};

struct SearchResult {
  HyperparameterSpace space;
  SearchConfig config;
  /// Every evaluated candidate, in evaluation order.
  std::vector<CandidateModel> archive;
  ObjectiveRanges ranges;
  bool calibrated = false;

  std::size_t index_of(std::string_view id) const;
  const CandidateModel& find(std::string_view id) const;
  std::size_t failures() const;
};

/// True when the MAPE.LIFT objective takes part in scalarization and
/// dominance.
bool calibration_active(const ModelContext& ctx, const ObjectiveWeights& weights);

/// Per trial: rand/1/bin differential evolution on the unit cube, each point
/// decoded through `space` and scored by the full pipeline. Selection uses the
/// scalarized score under ranges refreshed every generation. Archive scalars
/// are recomputed at the end against the ranges of the whole archive.
/// Progress lines go to `progress` when non-null.
SearchResult run_search(const ModelContext& ctx, const HyperparameterSpace& space,
                        const SearchConfig& cfg, std::ostream* progress = nullptr);

/// Recomputes every archive scalar against the ranges of the whole archive.
void rescore_archive(SearchResult& result);

std::string candidate_id(int trial, int iteration, int index);

}  // namespace mmm
