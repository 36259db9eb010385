#include "mmm/decomposition.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "mmm/error.hpp"

namespace mmm {

void DecompositionConfig::validate() const {
  auto fail = [](const std::string& m) { throw InputError("decomposition", m); };
  if (n_changepoints < 0) fail("n_changepoints must be >= 0");
  if (!(changepoint_span > 0.0 && changepoint_span <= 1.0)) fail("changepoint_span must be in (0, 1]");
  if (yearly_fourier_order < 1 || weekly_fourier_order < 1) fail("Fourier orders must be >= 1");
  if (!(trend_penalty >= 0.0) || !std::isfinite(trend_penalty)) fail("trend_penalty must be >= 0");
}

bool DecompositionConfig::has(ProphetComponent c) const {
  return std::find(components.begin(), components.end(), c) != components.end();
}

std::vector<std::string> DecompositionResult::component_names() const {
  std::vector<std::string> out;
  if (trend) out.emplace_back("trend");
  if (season) out.emplace_back("season");
  if (weekday) out.emplace_back("weekday");
  if (holiday) out.emplace_back("holiday");
  return out;
}

const Series& DecompositionResult::component(std::string_view name) const {
  const std::optional<Series>* c = nullptr;
  if (name == "trend") c = &trend;
  if (name == "season") c = &season;
  if (name == "weekday") c = &weekday;
  if (name == "holiday") c = &holiday;
  if (!c || !*c) throw InputError("decomposition", "component '" + std::string(name) + "' not fitted");
  return **c;
}

CsvTable DecompositionResult::to_table() const {
  CsvTable t;
  t.header.push_back("ds");
  const auto names = component_names();
  for (const auto& n : names) t.header.push_back(n);
  for (std::size_t i = 0; i < dates.size(); ++i) {
    std::vector<std::string> row{dates[i].iso()};
    for (const auto& n : names) row.push_back(format_number(component(n)[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

constexpr double kYearDays = 365.25;
// Keeps Fourier/holiday blocks solvable when columns coincide.
constexpr double kBasisRidge = 1e-8;

enum class Group { level, trend, season, weekday, holiday };

}  // namespace

DecompositionResult decompose(const MmmDataset& ds, const HolidayTable& holidays,
                              const DecompositionConfig& cfg) {
  cfg.validate();
  if (cfg.has(ProphetComponent::weekday) && ds.frequency() != Frequency::daily) {
    throw InputError("decomposition", "weekday component requires daily data");
  }
  if (cfg.has(ProphetComponent::holiday) && !holidays.has_country(cfg.country)) {
    throw InputError("decomposition",
                     "country '" + cfg.country + "' not present in holiday table");
  }

  const auto dates = ds.window_dates();
  const auto y = ds.window_column(ds.roles().dep_var);
  const auto n = static_cast<Eigen::Index>(dates.size());
  const Date origin = dates.front();
  const double span_days = std::max(1, dates.back() - origin);

  std::vector<Group> groups;
  std::vector<double> penalty;
  std::vector<Eigen::VectorXd> cols;
  auto add = [&](Group g, double p, Eigen::VectorXd v) {
    groups.push_back(g);
    penalty.push_back(p);
    cols.push_back(std::move(v));
  };

  Eigen::VectorXd t(n);
  for (Eigen::Index i = 0; i < n; ++i) t[i] = static_cast<double>(dates[static_cast<std::size_t>(i)] - origin);
  const Eigen::VectorXd s = t / span_days;

  add(Group::level, 0.0, Eigen::VectorXd::Ones(n));

  std::vector<Eigen::Index> changepoint_cols;
  if (cfg.has(ProphetComponent::trend)) {
    add(Group::trend, 0.0, s);
    for (int j = 1; j <= cfg.n_changepoints; ++j) {
      const double k = cfg.changepoint_span * j / cfg.n_changepoints;
      changepoint_cols.push_back(static_cast<Eigen::Index>(cols.size()));
      // Penalty is per observation so its strength does not depend on series length.
      add(Group::trend, cfg.trend_penalty * static_cast<double>(n), (s.array() - k).max(0.0).matrix());
    }
  }
  auto add_fourier = [&](Group g, double period, int order) {
    for (int k = 1; k <= order; ++k) {
      const Eigen::ArrayXd arg = t.array() * (2.0 * std::numbers::pi * k / period);
      add(g, kBasisRidge, arg.sin().matrix());
      add(g, kBasisRidge, arg.cos().matrix());
    }
  };
  if (cfg.has(ProphetComponent::season)) add_fourier(Group::season, kYearDays, cfg.yearly_fourier_order);
  if (cfg.has(ProphetComponent::weekday)) add_fourier(Group::weekday, 7.0, cfg.weekly_fourier_order);

  DecompositionResult result;
  result.config = cfg;
  result.dates.assign(dates.begin(), dates.end());

  if (cfg.has(ProphetComponent::holiday)) {
    // Each row covers [date, date + period); a holiday marks the row it falls in.
    const int step = period_days(ds.frequency());
    std::map<std::string, Eigen::VectorXd> by_name;
    for (const auto& h : holidays.entries()) {
      if (h.country != cfg.country) continue;
      const auto off = h.ds - origin;
      if (off < 0 || off >= (dates.back() - origin) + step) continue;
      const auto row = static_cast<Eigen::Index>(off / step);
      auto [it, inserted] = by_name.try_emplace(h.holiday, Eigen::VectorXd::Zero(n));
      it->second[row] = 1.0;
    }
    for (auto& [name, v] : by_name) {
      result.holiday_names.push_back(name);
      add(Group::holiday, kBasisRidge, std::move(v));
    }
  }

  const auto p = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index j = 0; j < p; ++j) X.col(j) = cols[static_cast<std::size_t>(j)];

  double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double var = 0;
  for (double v : y) var += (v - mean) * (v - mean);
  double sd = std::sqrt(var / static_cast<double>(n));
  if (!(sd > 0)) sd = 1.0;

  Eigen::VectorXd ys(n);
  for (Eigen::Index i = 0; i < n; ++i) ys[i] = (y[static_cast<std::size_t>(i)] - mean) / sd;

  Eigen::MatrixXd A = X.transpose() * X;
  for (Eigen::Index j = 0; j < p; ++j) A(j, j) += penalty[static_cast<std::size_t>(j)];
  const Eigen::VectorXd b = A.ldlt().solve(X.transpose() * ys);
  if (!b.allFinite()) throw NumericError("decomposition: basis solve produced non-finite values");

  auto group_fit = [&](Group g) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < p; ++j) {
      if (groups[static_cast<std::size_t>(j)] == g) out += X.col(j) * b[j];
    }
    return Eigen::VectorXd(out * sd);
  };
  auto to_series = [](const Eigen::VectorXd& v) { return Series(v.data(), v.data() + v.size()); };

  Eigen::VectorXd level = group_fit(Group::level) + group_fit(Group::trend);
  level.array() += mean;
  auto centered = [&](Group g) {
    Eigen::VectorXd c = group_fit(g);
    const double m = c.mean();
    c.array() -= m;
    level.array() += m;
    return c;
  };
  std::optional<Eigen::VectorXd> season, weekday, holiday;
  if (cfg.has(ProphetComponent::season)) season = centered(Group::season);
  if (cfg.has(ProphetComponent::weekday)) weekday = centered(Group::weekday);
  if (cfg.has(ProphetComponent::holiday)) holiday = group_fit(Group::holiday);

  Eigen::VectorXd fitted = level;
  if (season) fitted += *season;
  if (weekday) fitted += *weekday;
  if (holiday) fitted += *holiday;

  if (cfg.has(ProphetComponent::trend)) result.trend = to_series(level);
  if (season) result.season = to_series(*season);
  if (weekday) result.weekday = to_series(*weekday);
  if (holiday) result.holiday = to_series(*holiday);
  result.fitted = to_series(fitted);
  result.residual.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < result.residual.size(); ++i) result.residual[i] = y[i] - result.fitted[i];

  for (Eigen::Index j : changepoint_cols) result.slope_changes.push_back(b[j] * sd / span_days);
  return result;
}

}  // namespace mmm
