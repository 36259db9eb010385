#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mmm/decomposition.hpp"
#include "mmm/error.hpp"

using namespace mmm;

namespace {

struct Synthetic {
  CsvTable table;
  VariableRoles roles;
};

// y = f(day offset) with a dummy spend column so the dataset builds.
template <typename F>
Synthetic make_series(std::size_t n, int step, F f) {
  Synthetic s;
  s.roles.dep_var = "y";
  s.roles.paid_media_spends = {"x"};
  s.roles.paid_media_vars = {"x"};
  s.table.header = {"DATE", "y", "x"};
  const Date start = Date::from_ymd(2018, 1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const int d = static_cast<int>(i) * step;
    s.table.rows.push_back({(start + d).iso(), format_number(f(d)), format_number(1.0 + (i % 3))});
  }
  return s;
}

DecompositionConfig config(std::vector<ProphetComponent> comps) {
  DecompositionConfig c;
  c.components = std::move(comps);
  c.country = "DE";
  return c;
}

}  // namespace

TEST_CASE("linear trend plus annual cycle is recovered exactly") {
  const double two_pi = 2.0 * std::numbers::pi;
  auto f = [&](int d) { return 500.0 + 0.2 * d + 30.0 * std::sin(two_pi * d / 365.25); };
  const auto s = make_series(208, 7, f);
  const MmmDataset ds = build_dataset(s.table, s.roles, std::nullopt);
  DecompositionConfig cfg = config({ProphetComponent::trend, ProphetComponent::season});
  cfg.yearly_fourier_order = 1;
  const DecompositionResult r = decompose(ds, {}, cfg);

  REQUIRE(r.trend);
  REQUIRE(r.season);
  CHECK_FALSE(r.holiday);
  double season_mean = 0.0;
  for (double v : *r.season) season_mean += v;
  CHECK(std::abs(season_mean / 208.0) < 1e-9);
  for (std::size_t i = 0; i < 208; ++i) {
    const double y = f(static_cast<int>(7 * i));
    CHECK(r.fitted[i] == doctest::Approx(y).epsilon(1e-6));
    CHECK(r.residual[i] == doctest::Approx(0.0).scale(y).epsilon(1e-6));
    CHECK((*r.trend)[i] + (*r.season)[i] == doctest::Approx(r.fitted[i]));
  }
  // The centered season and the trend split the signal as generated, up to the season's window mean.
  double sin_mean = 0.0;
  for (std::size_t i = 0; i < 208; ++i) sin_mean += 30.0 * std::sin(two_pi * 7.0 * i / 365.25);
  sin_mean /= 208.0;
  for (std::size_t i = 0; i < 208; i += 13) {
    const int d = static_cast<int>(7 * i);
    CHECK((*r.season)[i] == doctest::Approx(30.0 * std::sin(two_pi * d / 365.25) - sin_mean).epsilon(1e-6).scale(30));
  }
}

TEST_CASE("changepoint slope changes are recovered without a penalty") {
  const std::size_t n = 101;
  const double span = 7.0 * (n - 1);
  auto f = [&](int d) {
    const double s = d / span;
    return 100.0 + 50.0 * s + 80.0 * std::max(0.0, s - 0.4);
  };
  const auto s = make_series(n, 7, f);
  const MmmDataset ds = build_dataset(s.table, s.roles, std::nullopt);
  DecompositionConfig cfg = config({ProphetComponent::trend});
  cfg.n_changepoints = 4;
  cfg.trend_penalty = 0.0;
  const DecompositionResult r = decompose(ds, {}, cfg);
  REQUIRE(r.slope_changes.size() == 4);
  CHECK(r.slope_changes[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
  CHECK(r.slope_changes[1] == doctest::Approx(80.0 / span).epsilon(1e-8));
  CHECK(r.slope_changes[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
  CHECK(r.slope_changes[3] == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
}

TEST_CASE("the trend penalty shrinks slope changes") {
  const std::size_t n = 101;
  auto f = [&](int d) { return 100.0 + 40.0 * std::max(0.0, d / 700.0 - 0.4); };
  const auto s = make_series(n, 7, f);
  const MmmDataset ds = build_dataset(s.table, s.roles, std::nullopt);
  DecompositionConfig loose = config({ProphetComponent::trend});
  loose.n_changepoints = 4;
  loose.trend_penalty = 0.0;
  DecompositionConfig tight = loose;
  tight.trend_penalty = 100.0;
  const double a = std::abs(decompose(ds, {}, loose).slope_changes[1]);
  const double b = std::abs(decompose(ds, {}, tight).slope_changes[1]);
  CHECK(b < a);
}

TEST_CASE("holiday indicators mark the period containing the holiday") {
  const HolidayTable hol({{Date::from_ymd(2018, 12, 25), "christmas", "DE"},
                          {Date::from_ymd(2019, 12, 25), "christmas", "DE"},
                          {Date::from_ymd(2018, 10, 3), "unity", "DE"},
                          {Date::from_ymd(2018, 7, 4), "independence", "US"}});
  // 2018-12-25 falls in the week starting 2018-12-24; 2019-12-25 in the week of 2019-12-23.
  auto f = [&](int d) {
    const Date day = Date::from_ymd(2018, 1, 1) + d;
    double v = 300.0;
    if (day == Date::from_ymd(2018, 12, 24) || day == Date::from_ymd(2019, 12, 23)) v += 40.0;
    if (day == Date::from_ymd(2018, 10, 1)) v -= 15.0;
    return v;
  };
  const auto s = make_series(104, 7, f);
  const MmmDataset ds = build_dataset(s.table, s.roles, std::nullopt);
  const DecompositionResult r = decompose(ds, hol, config({ProphetComponent::holiday}));
  CHECK(r.holiday_names == std::vector<std::string>{"christmas", "unity"});
  REQUIRE(r.holiday);
  const std::size_t xmas = static_cast<std::size_t>((Date::from_ymd(2018, 12, 24) - Date::from_ymd(2018, 1, 1)) / 7);
  const std::size_t unity = static_cast<std::size_t>((Date::from_ymd(2018, 10, 1) - Date::from_ymd(2018, 1, 1)) / 7);
  CHECK((*r.holiday)[xmas] == doctest::Approx(40.0).epsilon(1e-6));
  CHECK((*r.holiday)[unity] == doctest::Approx(-15.0).epsilon(1e-6));
  CHECK((*r.holiday)[xmas + 1] == 0.0);
  for (std::size_t i = 0; i < 104; ++i) CHECK(r.fitted[i] == doctest::Approx(f(static_cast<int>(7 * i))).epsilon(1e-6));
}

TEST_CASE("weekday pattern on daily data") {
  const double pattern[7] = {5, -3, 1, 0, 2, -6, 1};
  auto f = [&](int d) { return 200.0 + pattern[d % 7]; };
  const auto s = make_series(400, 1, f);
  const MmmDataset ds = build_dataset(s.table, s.roles, std::nullopt);
  const DecompositionResult r = decompose(ds, {}, config({ProphetComponent::weekday}));
  REQUIRE(r.weekday);
  CHECK_FALSE(r.trend);
  double mean = 0.0;  // over 400 days the pattern does not cancel exactly
  for (int d = 0; d < 400; ++d) mean += pattern[d % 7] / 400.0;
  for (std::size_t i = 0; i < 14; ++i) CHECK((*r.weekday)[i] == doctest::Approx(pattern[i % 7] - mean).epsilon(1e-6).scale(5));
}

TEST_CASE("decomposition input checks") {
  const auto s = make_series(60, 7, [](int d) { return 1.0 + d; });
  const MmmDataset ds = build_dataset(s.table, s.roles, std::nullopt);
  CHECK_THROWS_AS(decompose(ds, {}, config({ProphetComponent::weekday})), InputError);
  CHECK_THROWS_AS(decompose(ds, {}, config({ProphetComponent::holiday})), InputError);
  DecompositionConfig bad = config({ProphetComponent::trend});
  bad.yearly_fourier_order = 0;
  CHECK_THROWS_AS(decompose(ds, {}, bad), InputError);
  bad = config({ProphetComponent::trend});
  bad.changepoint_span = 1.5;
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("component table lists the fitted components") {
  const auto s = make_series(60, 7, [](int d) { return 10.0 + 0.1 * d + std::cos(d / 20.0); });
  const MmmDataset ds = build_dataset(s.table, s.roles, std::nullopt);
  const DecompositionResult r = decompose(ds, {}, config({ProphetComponent::trend, ProphetComponent::season}));
  const CsvTable t = r.to_table();
  CHECK(t.header == std::vector<std::string>{"ds", "trend", "season"});
  CHECK(t.rows.size() == 60);
  CHECK(r.component_names() == std::vector<std::string>{"trend", "season"});
  CHECK_THROWS_AS(r.component("holiday"), InputError);
}
