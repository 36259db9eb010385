#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmm/model.hpp"

namespace mmm {

struct WaterfallItem {
  std::string name;
  std::string group;  // "intercept" or a column group
  double total = 0.0;
  double share = 0.0;  // of the summed prediction
};

struct ShareItem {
  std::string channel;
  double spend_share = 0.0;
  double effect_share = 0.0;
  double efficiency = 0.0;  // ROI or CPA
};

struct BootstrapItem {
  std::string channel;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t cluster_size = 0;
  /// Set when the cluster is too small to resample: bounds are min and max.
  bool min_max = false;
};

struct DecayItem {
  std::string channel;
  double theta = 0.0;
  double shape = 0.0;
  double scale = 0.0;
  Series lag_weights;
};

struct ImmediateItem {
  std::string channel;
  double immediate_pct = 0.0;
  double carryover_pct = 0.0;
};

struct CurveItem {
  std::string channel;
  Series spend;
  Series response;
  double mean_spend = 0.0;
  double mean_response = 0.0;
};

struct OnePager {
  std::string model_id;
  DepVarType dep_var_type = DepVarType::revenue;
  AdstockFamily family = AdstockFamily::geometric;
  FitMetrics metrics;
  ObjectiveScores scores;
  std::optional<int> cluster;

  std::vector<WaterfallItem> waterfall;  // descending by total
  std::vector<ShareItem> shares;
  double total_efficiency = 0.0;
  std::optional<std::vector<BootstrapItem>> bootstrap;
  std::vector<DecayItem> decay;
  std::vector<ImmediateItem> immediate;
  std::vector<CurveItem> curves;
  std::vector<Date> dates;
  Series actual;
  Series predicted;
  SplitRanges split;
  Series residual;

  std::string efficiency_label() const { return dep_var_type == DepVarType::revenue ? "ROI" : "CPA"; }
  /// "NRMSE: train = … | val = … | test = …; Adj. R2: …; DECOMP.RSSD = …; MAPE = …"
  std::string header() const;
  std::string to_json() const;
};

inline constexpr int kBootstrapResamples = 2000;

/// Mean of `values` with a 95% percentile interval over bootstrap resample
/// means; fewer than five values give min/max bounds instead.
BootstrapItem bootstrap_mean(std::span<const double> values, std::uint64_t seed,
                             int resamples = kBootstrapResamples);

/// `cluster_members` are the archive candidates sharing the model's cluster;
/// empty leaves the bootstrap panel out.
OnePager build_onepager(const FittedModel& fit, const ModelContext& ctx,
                        std::span<const CandidateModel> cluster_members, std::uint64_t seed = 1);

/// Response-curve sample grid for a channel: `points` spends from 0 to
/// `factor` times its mean spend.
CurveItem response_curve_points(const ChannelSummary& channel, int points = 101, double factor = 3.0);

}  // namespace mmm
