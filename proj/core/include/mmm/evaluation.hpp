#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmm/csv.hpp"
#include "mmm/date.hpp"
#include "mmm/transforms.hpp"

namespace mmm {

enum class LiftScope { immediate, total };

std::string to_string(LiftScope s);

/// One calibration experiment. Field names follow the calibration input
/// columns: channel, liftStartDate, liftEndDate, liftAbs, spend, confidence,
/// metric, calibration_scope.
struct LiftStudy {
  std::vector<std::string> channels;  // "a+b" joins several channels
  Date lift_start;
  Date lift_end;
  double lift_abs = 0.0;
  double spend = 0.0;  // recorded and reported only
  double confidence = 1.0;
  std::string metric;
  LiftScope scope = LiftScope::immediate;

  std::string channel_label() const;
  void validate() const;
  bool operator==(const LiftStudy&) const = default;
};

std::vector<LiftStudy> parse_lift_studies(const CsvTable& table);
std::vector<LiftStudy> load_lift_studies(const std::filesystem::path& path);
CsvTable lift_studies_to_table(std::span<const LiftStudy> studies);

/// Modeled contribution of one channel per window row, in response units.
struct ChannelContribution {
  std::string channel;
  Series total;
  Series immediate;
};

struct ContributionTable {
  std::vector<Date> dates;
  std::vector<ChannelContribution> channels;

  const ChannelContribution& find(std::string_view channel) const;
};

/// sqrt(sum_c (effect_c - spend_c)^2). Throws on length mismatch.
double decomp_rssd(std::span<const double> effect_shares, std::span<const double> spend_shares);

double lift_prediction(const ContributionTable& contributions, const LiftStudy& study);

/// Confidence-weighted mean of |pred - lift_abs| / |lift_abs|.
double mape_lift(const ContributionTable& contributions, std::span<const LiftStudy> studies);

struct ObjectiveWeights {
  double nrmse = 1.0;
  double decomp_rssd = 1.0;
  double mape_lift = 1.0;

  void validate() const;
  std::array<double, 3> as_array() const { return {nrmse, decomp_rssd, mape_lift}; }
  bool operator==(const ObjectiveWeights&) const = default;
};

struct ObjectiveScores {
  double nrmse = 0.0;
  double decomp_rssd = 0.0;
  std::optional<double> mape_lift;
  double scalar = 0.0;
};

/// Running min/max per objective over an archive.
struct ObjectiveRanges {
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
  std::array<bool, 3> seen{};

  void include(const ObjectiveScores& s);
  /// (value - lo) / (hi - lo), 0 when the range is degenerate.
  double normalize(std::size_t k, double value) const;
};

/// sum_k w_k norm_k / sum_k w_k with archive-range normalization.
double scalarize(const ObjectiveScores& scores, const ObjectiveWeights& weights,
                 const ObjectiveRanges& ranges);

}  // namespace mmm
