#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmm/dataset.hpp"
#include "mmm/evaluation.hpp"
#include "mmm/transforms.hpp"

namespace mmm {

struct ChannelTruth {
  std::string name;
  double theta = 0.3;
  double shape = 1.0;
  double scale = 0.05;
  double alpha = 1.5;
  double gamma = 0.5;
  double roas = 1.0;         // target return over the window
  double mean_spend = 1e4;   // per period, before flighting
  double spend_log_sd = 0.3;
  /// Flighted channels alternate on and off blocks; others spend every period.
  bool flighted = true;

  // Derived by the generator.
  double coefficient = 0.0;
  double inflection = 0.0;
  double true_roas = 0.0;
};

struct SimulationTruth {
  AdstockFamily family = AdstockFamily::geometric;
  std::vector<ChannelTruth> channels;
  std::optional<ChannelTruth> organic;  // "newsletter"
  double intercept = 0.0;
  double trend_amplitude = 0.0;   // rise over the window
  double season_amplitude = 0.0;  // yearly sine amplitude
  double weekday_amplitude = 0.0; // daily data only
  double context_coefficient = 0.0;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
};

struct SimulationConfig {
  std::size_t n_periods = 208;
  /// Rows appended after the window, for refresh scenarios.
  std::size_t extra_periods = 0;
  Frequency frequency = Frequency::weekly;
  std::size_t channels = 3;
  std::uint64_t seed = 1;
  /// Noise sd as a fraction of the noise-free response sd.
  double noise_fraction = 0.05;
  AdstockFamily family = AdstockFamily::geometric;
  Date start = Date::from_ymd(2015, 11, 23);
  std::string country = "DE";  // empty: no holiday effects
  bool organic = false;
  bool context = false;
  bool events = false;
  /// Adds an exposure column (impressions) for facebook_S when present.
  bool exposure = false;
  /// Replaces the default per-channel truth (names and parameters).
  std::optional<std::vector<ChannelTruth>> truth;

  void validate() const;
};

struct LedgerTerm {
  std::string name;
  Series total;
  Series immediate;  // lag-0 part for media terms, else equal to total
};

struct Simulation {
  CsvTable table;
  VariableRoles roles;
  DateWindow window;
  HolidayTable holidays;
  SimulationTruth truth;
  Frequency frequency = Frequency::weekly;
  std::vector<Date> dates;
  Series response;
  std::vector<Series> spends;  // per truth channel, all rows
  /// Per-period contribution of every generative term over all rows.
  std::vector<LedgerTerm> ledger;

  const LedgerTerm& term(std::string_view name) const;
  /// Sum of the named channels' true contributions over [start, end].
  double true_lift(const std::vector<std::string>& channels, Date start, Date end,
                   LiftScope scope = LiftScope::total) const;
  /// Lift studies cut from the ledger: one per channel in turn, `length`
  /// periods each, placed at seeded positions inside the window.
  std::vector<LiftStudy> cut_lift_studies(std::size_t count, std::size_t length, std::uint64_t seed,
                                          LiftScope scope = LiftScope::total) const;
  std::string truth_json() const;
};

std::vector<std::string> default_channel_names(std::size_t count);
std::vector<ChannelTruth> default_channel_truth(std::size_t count, AdstockFamily family);

Simulation simulate(const SimulationConfig& cfg);

/// Public holidays for "DE" or "US" over [first_year, last_year].
HolidayTable generate_holidays(std::string_view country, int first_year, int last_year);
Date easter_sunday(int year);

}  // namespace mmm
