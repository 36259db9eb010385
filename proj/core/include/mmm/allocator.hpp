#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmm/dataset.hpp"
#include "mmm/transforms.hpp"

namespace mmm {

struct ChannelResponse {
  std::string name;
  ResponseCurve curve;
  Series spend_history;  // modeling window
};

/// The parts of a selected model the allocator may use.
struct ResponseModel {
  std::string model_id;
  DepVarType dep_var_type = DepVarType::revenue;
  std::vector<Date> dates;
  std::vector<ChannelResponse> channels;

  const ChannelResponse& channel(std::string_view name) const;
  /// Row range [first, last) of `range` within the window; whole window when
  /// absent.
  std::pair<std::size_t, std::size_t> range_rows(const std::optional<DateWindow>& range) const;
  /// Mean per-period spend of each channel over the range.
  std::vector<double> historical_means(const std::optional<DateWindow>& range) const;
};

/// r_c(m) = coefficient * hill(adstock_ratio * m). Throws for unknown
/// channels, negative spend, or channels without spend history.
double channel_response(const ResponseModel& model, std::string_view channel, double spend);
double marginal_response(const ResponseModel& model, std::string_view channel, double spend);

enum class Scenario { max_response, target_efficiency };

std::string to_string(Scenario s);
Scenario parse_scenario(std::string_view text);

struct AllocationProblem {
  Scenario scenario = Scenario::max_response;
  std::optional<DateWindow> date_range;
  /// Total spend over the date range; defaults to the historical total.
  std::optional<double> total_budget;
  /// ROAS floor (revenue) or CPA ceiling (conversion).
  std::optional<double> target_value;
  /// Multipliers of historical mean per-period spend; one value applies to
  /// every channel. Empty means the scenario default (0.5/2 for max_response,
  /// 0.1/10 for target_efficiency).
  std::vector<double> channel_constr_low;
  std::vector<double> channel_constr_up;
  int starts = 10;
  std::uint64_t seed = 1;
};

struct ChannelAllocation {
  std::string name;
  double historical_spend = 0.0;  // mean per period
  double lower = 0.0;
  double upper = 0.0;
  double spend = 0.0;  // mean per period
  double response = 0.0;
  double historical_response = 0.0;
  double marginal = 0.0;
  bool at_lower = false;
  bool at_upper = false;
};

struct AllocationPlan {
  Scenario scenario = Scenario::max_response;
  std::string model_id;
  DepVarType dep_var_type = DepVarType::revenue;
  std::size_t periods = 0;
  double budget = 0.0;  // per period, sum over channels
  std::vector<ChannelAllocation> channels;
  double total_response = 0.0;  // per period
  double historical_response = 0.0;
  /// ROAS (response / spend) for revenue, CPA (spend / response) for conversions.
  double efficiency = 0.0;
  std::optional<double> target_value;
  std::string status = "ok";
  bool converged = true;
  double kkt_residual = 0.0;
  double budget_violation = 0.0;
  int restarts = 0;
  int best_restart = 0;
  std::vector<double> restart_objectives;

  std::string to_json() const;
};

AllocationPlan allocate_max_response(const ResponseModel& model, const AllocationProblem& problem);
AllocationPlan allocate_target_efficiency(const ResponseModel& model, const AllocationProblem& problem);
AllocationPlan allocate(const ResponseModel& model, const AllocationProblem& problem);

/// Euclidean projection onto {x : sum x = budget, lower <= x <= upper}.
std::vector<double> project_budget(const std::vector<double>& y, const std::vector<double>& lower,
                                   const std::vector<double>& upper, double budget);

}  // namespace mmm
