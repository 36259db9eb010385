#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mmm/search.hpp"

namespace mmm {

/// a dominates b: no worse in every objective and better in at least one.
bool dominates(const std::vector<double>& a, const std::vector<double>& b);

/// Non-dominated sorting (sequential-search ENS). Returns fronts of indices
/// into `points`, best front first, each front in ascending index order.
std::vector<std::vector<std::size_t>> nondominated_sort(const std::vector<std::vector<double>>& points);

struct ParetoConfig {
  ObjectiveWeights weights;
  bool calibrated = false;
  double calibration_constraint = 0.1;
  std::size_t min_candidates = 100;
};

ParetoConfig pareto_config(const SearchResult& result);

struct ParetoResult {
  /// Archive indices of the retained fronts, front by front.
  std::vector<std::vector<std::size_t>> fronts;
  /// Candidates removed by the calibration filter.
  std::size_t calibration_excluded = 0;
  /// MAPE.LIFT quantile used by the calibration filter.
  std::optional<double> mape_threshold;

  std::vector<std::size_t> members() const;
  std::size_t size() const;
};

/// Objective vector used for dominance: NRMSE and Decomp.RSSD when their
/// weights are positive, MAPE.LIFT when calibrated.
std::vector<double> active_objectives(const CandidateModel& m, const ParetoConfig& cfg);

/// Sorts the successful candidates and keeps fronts until at least
/// min_candidates are retained. With calibration active, candidates whose
/// MAPE.LIFT exceeds the calibration_constraint quantile are dropped first.
ParetoResult pareto_fronts(const std::vector<CandidateModel>& archive, const ParetoConfig& cfg);

/// Writes pareto_front (1-based) on retained candidates and clears it on the
/// rest.
void assign_fronts(std::vector<CandidateModel>& archive, const ParetoResult& pareto);

/// Front-1 candidate with the lowest scalar (lowest archive index on ties).
std::size_t select_best(const std::vector<CandidateModel>& archive, const ParetoResult& pareto);

/// Linear-interpolation sample quantile.
double quantile(std::vector<double> values, double q);

}  // namespace mmm
