#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "mmm/error.hpp"
#include "mmm/simulator.hpp"

using namespace mmm;

namespace {

double window_sum(const Series& v, std::size_t n) { return std::accumulate(v.begin(), v.begin() + static_cast<long>(n), 0.0); }

}  // namespace

TEST_CASE("Easter dates") {
  CHECK(easter_sunday(2000) == Date::from_ymd(2000, 4, 23));
  CHECK(easter_sunday(2016) == Date::from_ymd(2016, 3, 27));
  CHECK(easter_sunday(2019) == Date::from_ymd(2019, 4, 21));
  CHECK(easter_sunday(2020) == Date::from_ymd(2020, 4, 12));
  CHECK(easter_sunday(2024) == Date::from_ymd(2024, 3, 31));
  CHECK(easter_sunday(2038) == Date::from_ymd(2038, 4, 25));
}

TEST_CASE("generated public holidays") {
  const HolidayTable de = generate_holidays("DE", 2021, 2021);
  CHECK(de.entries().size() == 9);
  auto has = [](const HolidayTable& t, Date d, const std::string& name) {
    return std::any_of(t.entries().begin(), t.entries().end(),
                       [&](const Holiday& h) { return h.ds == d && h.holiday == name; });
  };
  CHECK(has(de, Date::from_ymd(2021, 4, 2), "Good Friday"));
  CHECK(has(de, Date::from_ymd(2021, 5, 13), "Ascension Day"));
  CHECK(has(de, Date::from_ymd(2021, 5, 24), "Whit Monday"));
  const HolidayTable us = generate_holidays("US", 2020, 2022);
  CHECK(us.entries().size() == 30);
  CHECK(has(us, Date::from_ymd(2020, 11, 26), "Thanksgiving"));
  CHECK(has(us, Date::from_ymd(2021, 5, 31), "Memorial Day"));
  CHECK(has(us, Date::from_ymd(2022, 1, 17), "Martin Luther King Jr. Day"));
  CHECK(has(us, Date::from_ymd(2022, 9, 5), "Labor Day"));
  CHECK_THROWS_AS(generate_holidays("FR", 2020, 2020), InputError);
}

TEST_CASE("the ledger adds up to the response") {
  SimulationConfig cfg;
  cfg.seed = 3;
  cfg.organic = true;
  cfg.context = true;
  cfg.events = true;
  cfg.extra_periods = 13;
  const Simulation sim = simulate(cfg);
  CHECK(sim.dates.size() == 221);
  CHECK(sim.table.rows.size() == 221);
  CHECK(sim.window.end == sim.dates[207]);
  for (std::size_t i = 0; i < sim.dates.size(); ++i) {
    double s = 0.0;
    for (const auto& t : sim.ledger) s += t.total[i];
    CHECK(s == doctest::Approx(sim.response[i]).epsilon(1e-12));
    CHECK(parse_number(sim.table.rows[i][1]).value() == sim.response[i]);
  }
  for (const char* name : {"intercept", "trend", "season", "holiday", "newsletter", "competitor_sales_B", "events", "noise"}) {
    CHECK_NOTHROW(sim.term(name));
  }
  CHECK_THROWS_AS(sim.term("weekday"), InputError);
  CHECK(sim.roles.factor_vars == std::vector<std::string>{"events"});

  // The table builds into a dataset with the stated window.
  const MmmDataset ds = build_dataset(sim.table, sim.roles, sim.window);
  CHECK(ds.window_size() == 208);
  CHECK(ds.size() == 208);
}

TEST_CASE("media terms follow adstock, Hill saturation and the target ROAS") {
  SimulationConfig cfg;
  cfg.seed = 8;
  const Simulation sim = simulate(cfg);
  const std::size_t n = 208;
  for (std::size_t c = 0; c < sim.truth.channels.size(); ++c) {
    const ChannelTruth& t = sim.truth.channels[c];
    const Series& x = sim.spends[c];
    Series ad(x.size());
    double carry = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) ad[i] = carry = x[i] + t.theta * carry;
    const auto [lo, hi] = std::minmax_element(ad.begin(), ad.begin() + n);
    const double k = *lo + t.gamma * (*hi - *lo);
    CHECK(t.inflection == doctest::Approx(k).epsilon(1e-12));
    const LedgerTerm& term = sim.term(t.name);
    for (std::size_t i = 0; i < x.size(); i += 7) {
      const double h = ad[i] > 0 ? std::pow(ad[i], t.alpha) / (std::pow(ad[i], t.alpha) + std::pow(k, t.alpha)) : 0.0;
      CHECK(term.total[i] == doctest::Approx(t.coefficient * h).epsilon(1e-10));
      const double hi0 = x[i] > 0 ? std::pow(x[i], t.alpha) / (std::pow(x[i], t.alpha) + std::pow(k, t.alpha)) : 0.0;
      CHECK(term.immediate[i] == doctest::Approx(t.coefficient * hi0).epsilon(1e-10));
    }
    CHECK(t.true_roas == doctest::Approx(window_sum(term.total, n) / window_sum(x, n)).epsilon(1e-12));
    CHECK(t.true_roas == doctest::Approx(t.roas).epsilon(1e-12));
  }
  // Each flighted channel has dark periods; every channel spends something.
  CHECK(std::count(sim.spends[0].begin(), sim.spends[0].end(), 0.0) > 0);
}

TEST_CASE("lift studies are sums of the true contributions") {
  SimulationConfig cfg;
  cfg.seed = 2;
  const Simulation sim = simulate(cfg);
  const auto studies = sim.cut_lift_studies(4, 8, 11);
  REQUIRE(studies.size() == 4);
  for (std::size_t k = 0; k < studies.size(); ++k) {
    const LiftStudy& s = studies[k];
    CHECK(s.channels == std::vector<std::string>{sim.truth.channels[k % 3].name});
    CHECK(s.lift_end - s.lift_start == 49);
    CHECK(s.lift_start >= sim.window.start);
    CHECK(s.lift_end <= sim.window.end);
    double lift = 0.0, spend = 0.0;
    for (std::size_t i = 0; i < sim.dates.size(); ++i) {
      if (sim.dates[i] < s.lift_start || sim.dates[i] > s.lift_end) continue;
      lift += sim.term(s.channels[0]).total[i];
      spend += sim.spends[k % 3][i];
    }
    CHECK(s.lift_abs == doctest::Approx(lift).epsilon(1e-12));
    CHECK(s.spend == doctest::Approx(spend).epsilon(1e-12));
    CHECK(s.lift_abs > 0.0);
  }
  const auto immediate = sim.cut_lift_studies(1, 8, 11, LiftScope::immediate);
  CHECK(immediate[0].lift_abs < studies[0].lift_abs);
  CHECK(sim.cut_lift_studies(4, 8, 11) == studies);
  CHECK_THROWS_AS(sim.cut_lift_studies(1, 500, 1), InputError);
}

TEST_CASE("simulation is deterministic for a seed") {
  SimulationConfig cfg;
  cfg.seed = 21;
  cfg.exposure = true;
  cfg.channels = 4;
  const Simulation a = simulate(cfg);
  const Simulation b = simulate(cfg);
  CHECK(a.table == b.table);
  CHECK(a.truth_json() == b.truth_json());
  cfg.seed = 22;
  CHECK_FALSE(simulate(cfg).table == a.table);
  CHECK(a.roles.paid_media_vars.back() == "facebook_I");
  CHECK(a.table.column_index("facebook_I"));
}

TEST_CASE("truth document") {
  SimulationConfig cfg;
  cfg.organic = true;
  const Simulation sim = simulate(cfg);
  const auto j = nlohmann::json::parse(sim.truth_json());
  CHECK(j["channels"].size() == 3);
  CHECK(j["channels"][0]["name"] == "tv_S");
  CHECK(j["channels"][1]["true_roas"].get<double>() == doctest::Approx(sim.truth.channels[1].true_roas));
  CHECK(j["organic"]["name"] == "newsletter");
  CHECK(j["ledger"]["dates"].size() == 208);
  CHECK(j["ledger"]["terms"]["noise"]["total"].size() == 208);
  CHECK(j["window"]["start"] == "2015-11-23");
}

TEST_CASE("daily simulation and families") {
  SimulationConfig cfg;
  cfg.frequency = Frequency::daily;
  cfg.n_periods = 200;
  cfg.family = AdstockFamily::weibull_pdf;
  cfg.country = "US";
  const Simulation sim = simulate(cfg);
  CHECK_NOTHROW(sim.term("weekday"));
  CHECK(sim.dates[1] - sim.dates[0] == 1);
  CHECK(std::count(sim.roles.prophet_vars.begin(), sim.roles.prophet_vars.end(), ProphetComponent::weekday) == 1);
  CHECK(sim.truth.channels[0].theta == 0.0);
  CHECK(sim.truth.channels[0].true_roas == doctest::Approx(sim.truth.channels[0].roas));
}

TEST_CASE("simulation configuration checks") {
  SimulationConfig cfg;
  cfg.n_periods = 50;
  CHECK_THROWS_AS(simulate(cfg), InputError);
  cfg = {};
  cfg.country = "FR";
  CHECK_THROWS_AS(simulate(cfg), InputError);
  cfg = {};
  auto truth = default_channel_truth(2, AdstockFamily::geometric);
  truth[0].theta = 0.95;
  cfg.truth = truth;
  CHECK_THROWS_AS(simulate(cfg), InputError);
  cfg = {};
  cfg.noise_fraction = -1;
  CHECK_THROWS_AS(simulate(cfg), InputError);
  CHECK(default_channel_names(7).back() == "channel7_S");
  cfg = {};
  cfg.country.clear();
  const Simulation quiet = simulate(cfg);
  CHECK_THROWS_AS(quiet.term("holiday"), InputError);
  CHECK(quiet.holidays.entries().empty());
}
