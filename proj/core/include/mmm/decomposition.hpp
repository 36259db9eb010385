#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmm/dataset.hpp"

namespace mmm {

struct DecompositionConfig {
  std::vector<ProphetComponent> components;
  std::string country;
  int n_changepoints = 10;
  /// Fraction of the window, from its start, over which changepoints are spread.
  double changepoint_span = 0.8;
  int yearly_fourier_order = 10;
  int weekly_fourier_order = 3;
  /// Squared penalty on slope changes at the changepoints, per observation,
  /// with time measured as a fraction of the window.
  double trend_penalty = 1.0;

  void validate() const;
  bool has(ProphetComponent c) const;
  bool operator==(const DecompositionConfig&) const = default;
};

/// Component series over the modeling window. Season and weekday are
/// centered; the trend carries the level.
struct DecompositionResult {
  DecompositionConfig config;
  std::vector<Date> dates;
  std::optional<Series> trend;
  std::optional<Series> season;
  std::optional<Series> weekday;
  std::optional<Series> holiday;
  Series fitted;
  Series residual;
  /// Slope change at each changepoint, in response units per day.
  std::vector<double> slope_changes;
  std::vector<std::string> holiday_names;

  std::vector<std::string> component_names() const;
  const Series& component(std::string_view name) const;
  CsvTable to_table() const;
};

/// Joint penalized least-squares fit of trend, yearly and weekly Fourier
/// seasonality and per-holiday indicators on the dependent variable alone.
DecompositionResult decompose(const MmmDataset& ds, const HolidayTable& holidays,
                              const DecompositionConfig& cfg);

}  // namespace mmm
