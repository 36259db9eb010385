#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mmm/dataset.hpp"
#include "mmm/decomposition.hpp"
#include "mmm/evaluation.hpp"
#include "mmm/hyperparameters.hpp"
#include "mmm/regression.hpp"

namespace mmm {

struct ModelSpec {
  AdstockFamily adstock = AdstockFamily::geometric;
  /// Weibull convolution length; defaults to the window length for weekly
  /// data and 60 periods for daily data.
  std::optional<std::size_t> max_lag;
  SplitPlan split;
  /// When set, Decomp.RSSD compares effect shares with these instead of the
  /// spend shares (one value per paid channel, summing to 1).
  std::optional<std::vector<double>> reference_shares;
};

/// Everything the pipeline needs that does not depend on hyperparameters:
/// window slices, fixed baseline columns, spend shares and normalized lift
/// studies. Built once per search.
class ModelContext {
 public:
  ModelContext(MmmDataset dataset, DecompositionResult decomposition, ModelSpec spec,
               std::vector<LiftStudy> studies = {});

  const MmmDataset& dataset() const { return dataset_; }
  const DecompositionResult& decomposition() const { return decomposition_; }
  const ModelSpec& spec() const { return spec_; }
  const std::vector<LiftStudy>& studies() const { return studies_; }
  bool has_studies() const { return !studies_.empty(); }

  std::size_t max_lag() const { return max_lag_; }
  /// Paid spends followed by organic variables.
  const std::vector<std::string>& channels() const { return channels_; }
  std::size_t paid_count() const { return paid_count_; }
  bool is_paid(std::size_t i) const { return i < paid_count_; }

  /// Context and decomposition regressors, minus those constant over the
  /// training rows.
  const std::vector<DesignMatrix::Column>& fixed_columns() const { return fixed_; }
  const std::vector<std::string>& dropped_columns() const { return dropped_; }
  const Series& response() const { return response_; }

  const std::vector<double>& spend_totals() const { return spend_totals_; }
  const std::vector<double>& spend_shares() const { return spend_shares_; }
  /// Spend shares, or the reference shares when the spec carries them.
  const std::vector<double>& rssd_reference() const;

  HyperparameterSpace default_space() const { return {spec_.adstock, channels_}; }

 private:
  MmmDataset dataset_;
  DecompositionResult decomposition_;
  ModelSpec spec_;
  std::vector<LiftStudy> studies_;
  std::size_t max_lag_ = 1;
  std::vector<std::string> channels_;
  std::size_t paid_count_ = 0;
  std::vector<DesignMatrix::Column> fixed_;
  std::vector<std::string> dropped_;
  Series response_;
  std::vector<double> spend_totals_;
  std::vector<double> spend_shares_;
};

struct ChannelSummary {
  std::string name;
  bool paid = true;
  double theta = 0.0;
  double shape = 0.0;
  double scale = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
  double inflection = 0.0;
  double adstock_ratio = 0.0;
  double coefficient = 0.0;  // response units per saturated unit
  double total_spend = 0.0;
  double mean_spend = 0.0;
  double total_contribution = 0.0;
  double immediate_contribution = 0.0;
  double effect_share = 0.0;  // among paid channels; 0 for organic
  double spend_share = 0.0;   // among paid channels; 0 for organic
  /// contribution / spend, and its inverse.
  double roi = 0.0;
  double cpa = 0.0;
};

struct CoefficientSummary {
  std::string name;
  ColumnGroup group = ColumnGroup::context;
  double standardized = 0.0;
  double value = 0.0;  // data units
  double mean = 0.0;
  double sd = 1.0;
};

/// Archive record: hyperparameters, fit summary and scores. The series-level
/// detail is recomputed on demand by fit_candidate.
struct CandidateModel {
  std::string id;
  int trial = 0;
  int iteration = 0;
  int index = 0;
  HyperparameterVector hyperparameters;
  bool ok = true;
  std::string error;

  double lambda = 0.0;
  double intercept = 0.0;
  double response_mean = 0.0;
  double response_sd = 1.0;
  bool converged = true;
  std::vector<CoefficientSummary> coefficients;
  std::vector<ChannelSummary> channels;
  FitMetrics metrics;
  ObjectiveScores scores;

  std::optional<int> pareto_front;
  std::optional<int> cluster;

  /// Efficiency per paid channel: ROI for revenue, CPA for conversions.
  std::vector<double> efficiency(DepVarType type) const;
  const ChannelSummary& channel(std::string_view name) const;
};

struct PredictorContribution {
  std::string name;
  ColumnGroup group;
  Series values;  // window rows, response units
};

struct FittedModel {
  CandidateModel summary;
  std::vector<Date> dates;
  Series actual;
  Series predicted;
  double intercept = 0.0;
  std::vector<PredictorContribution> predictors;
  std::vector<TransformedChannel> transforms;
  ContributionTable contributions;
  SplitRanges split;
};

/// Full pipeline: transforms, design, ridge fit, metrics, contributions and
/// objectives. Throws on numerical or input failure.
FittedModel fit_candidate(const ModelContext& ctx, const HyperparameterSpace& space,
                          const HyperparameterVector& hp);

/// As fit_candidate, returning only the archive record. Failures yield ok =
/// false and infinite scores.
CandidateModel evaluate_candidate(const ModelContext& ctx, const HyperparameterSpace& space,
                                  const HyperparameterVector& hp);

}  // namespace mmm
