#include <doctest.h>

#include <cmath>
#include <limits>

#include "mmm/error.hpp"
#include "mmm/evaluation.hpp"
#include "mmm/model.hpp"
#include "test_support.hpp"

using namespace mmm;

namespace {

ContributionTable toy_table() {
  ContributionTable t;
  const Date start = Date::from_ymd(2021, 1, 4);
  for (int i = 0; i < 6; ++i) t.dates.push_back(start + 7 * i);
  t.channels.push_back({"tv", {10, 20, 30, 40, 50, 60}, {5, 10, 15, 20, 25, 30}});
  t.channels.push_back({"radio", {1, 1, 1, 1, 1, 1}, {1, 1, 1, 1, 1, 1}});
  return t;
}

LiftStudy study(std::vector<std::string> ch, Date a, Date b, double lift, double conf = 1.0,
                LiftScope scope = LiftScope::total) {
  LiftStudy s;
  s.channels = std::move(ch);
  s.lift_start = a;
  s.lift_end = b;
  s.lift_abs = lift;
  s.spend = 100;
  s.confidence = conf;
  s.metric = "revenue";
  s.scope = scope;
  return s;
}

}  // namespace

TEST_CASE("Decomp.RSSD is the Euclidean distance between share vectors") {
  const std::vector<double> e{0.5, 0.3, 0.2}, s{0.4, 0.4, 0.2};
  CHECK(decomp_rssd(e, s) == doctest::Approx(std::sqrt(0.01 + 0.01)));
  CHECK(decomp_rssd(s, s) == 0.0);
  CHECK_THROWS_AS(decomp_rssd(e, std::vector<double>{1.0}), InputError);
}

TEST_CASE("lift prediction sums the study window rows") {
  const ContributionTable t = toy_table();
  const Date d0 = t.dates[0];
  // Dates between rows select the rows whose start date falls inside the window.
  CHECK(lift_prediction(t, study({"tv"}, d0 + 7, d0 + 20, 0)) == 50.0);
  CHECK(lift_prediction(t, study({"tv"}, d0 + 7, d0 + 21, 0)) == 90.0);
  CHECK(lift_prediction(t, study({"tv"}, d0 + 7, d0 + 21, 0, 1.0, LiftScope::immediate)) == 45.0);
  CHECK(lift_prediction(t, study({"tv", "radio"}, d0, d0 + 35, 0)) == 216.0);
  CHECK_THROWS_AS(lift_prediction(t, study({"tv"}, d0 + 100, d0 + 120, 0)), InputError);
  CHECK_THROWS_AS(lift_prediction(t, study({"print"}, d0, d0 + 7, 0)), InputError);
}

TEST_CASE("MAPE.LIFT is the confidence-weighted mean percentage error") {
  const ContributionTable t = toy_table();
  const Date d0 = t.dates[0];
  const std::vector<LiftStudy> studies{study({"tv"}, d0, d0 + 7, 40, 0.5),  // pred 30
                                       study({"radio"}, d0, d0 + 14, 2, 1.0)};  // pred 3
  const double expected = (0.5 * 10.0 / 40.0 + 1.0 * 1.0 / 2.0) / 1.5;
  CHECK(mape_lift(t, studies) == doctest::Approx(expected));
  CHECK_THROWS_AS(mape_lift(t, std::vector<LiftStudy>{}), InputError);
}

TEST_CASE("lift studies round trip through the calibration table") {
  const Date d0 = Date::from_ymd(2021, 1, 4);
  const std::vector<LiftStudy> studies{study({"tv"}, d0, d0 + 28, 1234.5, 0.9),
                                       study({"fb", "ig"}, d0 + 7, d0 + 14, -50, 1.0, LiftScope::immediate)};
  const CsvTable t = lift_studies_to_table(studies);
  CHECK(t.rows[1][0] == "fb+ig");
  CHECK(parse_lift_studies(t) == studies);

  CsvTable bad = t;
  bad.rows[0][5] = "1.5";
  CHECK_THROWS_AS(parse_lift_studies(bad), InputError);
  bad = t;
  bad.rows[0][7] = "lagged";
  CHECK_THROWS_AS(parse_lift_studies(bad), InputError);
  bad = t;
  bad.rows[0][3] = "0";
  CHECK_THROWS_AS(parse_lift_studies(bad), InputError);
  bad = t;
  std::swap(bad.rows[0][1], bad.rows[0][2]);
  CHECK_THROWS_AS(parse_lift_studies(bad), InputError);
  bad = t;
  bad.header[3] = "lift";
  CHECK_THROWS_AS(parse_lift_studies(bad), InputError);
}

TEST_CASE("scalarization normalizes by archive ranges") {
  ObjectiveRanges r;
  r.include({0.1, 0.5, 0.2, 0});
  r.include({0.3, 0.1, 0.4, 0});
  r.include({std::numeric_limits<double>::infinity(), 9.0, std::nullopt, 0});
  CHECK(r.lo[0] == 0.1);
  CHECK(r.hi[0] == 0.3);
  CHECK(r.hi[1] == 9.0);
  CHECK(r.normalize(0, 0.2) == doctest::Approx(0.5));

  const ObjectiveScores s{0.2, 0.5, 0.3, 0};
  const double n0 = 0.5, n1 = (0.5 - 0.1) / 8.9, n2 = 0.5;
  CHECK(scalarize(s, {1, 1, 1}, r) == doctest::Approx((n0 + n1 + n2) / 3));
  CHECK(scalarize(s, {2, 0, 1}, r) == doctest::Approx((2 * n0 + n2) / 3));
  CHECK(scalarize(s, {1, 0, 0}, r) == doctest::Approx(n0));

  ObjectiveRanges flat;
  flat.include({0.2, 0.2, std::nullopt, 0});
  CHECK(flat.normalize(0, 0.2) == 0.0);

  CHECK_THROWS_AS(scalarize({0.2, 0.5, std::nullopt, 0}, {1, 1, 1}, r), InputError);
  CHECK_THROWS_AS(scalarize(s, {0, 0, 0}, r), InputError);
  CHECK_THROWS_AS(scalarize(s, {-1, 1, 0}, r), InputError);
}

TEST_CASE("candidate objectives agree with their definitions") {
  auto sm = mmm::testing::simulated_context(mmm::testing::small_simulation(4), 1, 2);
  const ModelContext& ctx = sm.context;
  const HyperparameterSpace space = ctx.default_space();
  const HyperparameterVector hp = mmm::testing::true_hyperparameters(sm.sim, space);
  const FittedModel fit = fit_candidate(ctx, space, hp);
  const CandidateModel& m = fit.summary;
  REQUIRE(m.ok);

  // Predictor contributions and the intercept add up to the prediction.
  for (std::size_t t = 0; t < fit.predicted.size(); ++t) {
    double acc = fit.intercept;
    for (const auto& p : fit.predictors) acc += p.values[t];
    CHECK(acc == doctest::Approx(fit.predicted[t]).epsilon(1e-9));
  }

  std::vector<double> totals, effect;
  double effect_sum = 0.0;
  for (std::size_t i = 0; i < ctx.paid_count(); ++i) {
    double total = 0.0;
    for (double v : fit.contributions.find(ctx.channels()[i]).total) total += v;
    totals.push_back(total);
    effect_sum += total;
  }
  for (std::size_t i = 0; i < ctx.paid_count(); ++i) {
    effect.push_back(totals[i] / effect_sum);
    CHECK(m.channels[i].effect_share == doctest::Approx(effect.back()).epsilon(1e-12));
    CHECK(m.channels[i].total_contribution == doctest::Approx(totals[i]).epsilon(1e-9));
    const auto w = ctx.dataset().window_column(ctx.channels()[i]);
    double s = 0.0;
    for (double v : w) s += v;
    CHECK(m.channels[i].roi == doctest::Approx(totals[i] / s).epsilon(1e-12));
  }
  CHECK(m.scores.decomp_rssd == doctest::Approx(decomp_rssd(effect, ctx.spend_shares())).epsilon(1e-12));
  REQUIRE(m.scores.mape_lift);
  CHECK(*m.scores.mape_lift == doctest::Approx(mape_lift(fit.contributions, ctx.studies())).epsilon(1e-12));
  CHECK(m.scores.nrmse == doctest::Approx(m.metrics.selection_nrmse()));

  // Immediate contributions never exceed totals for positive coefficients.
  for (const auto& c : fit.contributions.channels) {
    for (std::size_t t = 0; t < c.total.size(); ++t) CHECK(c.immediate[t] <= c.total[t] + 1e-9);
  }
}

TEST_CASE("failed candidates carry infinite scores") {
  auto sm = mmm::testing::simulated_context(mmm::testing::small_simulation(2), 1);
  const HyperparameterSpace space = sm.context.default_space();
  HyperparameterVector hp = mmm::testing::true_hyperparameters(sm.sim, space);
  hp.set(hyperparameter_name(space.channels()[0], "thetas"), 1.5);
  const CandidateModel m = evaluate_candidate(sm.context, space, hp);
  CHECK_FALSE(m.ok);
  CHECK_FALSE(m.error.empty());
  CHECK(std::isinf(m.scores.nrmse));
  CHECK(std::isinf(m.scores.scalar));
}
