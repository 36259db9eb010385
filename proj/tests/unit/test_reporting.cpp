#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "mmm/csv.hpp"
#include "mmm/onepager.hpp"
#include "mmm/plots.hpp"
#include "test_support.hpp"

using namespace mmm;

namespace {

struct Fitted {
  mmm::testing::SimulatedModel sm = mmm::testing::simulated_context(mmm::testing::small_simulation(5), 2);
  FittedModel fit;

  Fitted() {
    const HyperparameterSpace space = sm.context.default_space();
    fit = fit_candidate(sm.context, space, mmm::testing::true_hyperparameters(sm.sim, space));
    fit.summary.id = "1_4_7";
  }
};

bool well_formed(const std::string& s) {
  return s.rfind("<svg", 0) == 0 && s.find("</svg>") != std::string::npos &&
         std::count(s.begin(), s.end(), '<') == std::count(s.begin(), s.end(), '>');
}

}  // namespace

TEST_CASE("bootstrap intervals around a mean") {
  const std::vector<double> few{3.0, 1.0, 2.0};
  const BootstrapItem small = bootstrap_mean(few, 1);
  CHECK(small.min_max);
  CHECK(small.mean == 2.0);
  CHECK(small.lower == 1.0);
  CHECK(small.upper == 3.0);
  CHECK(small.cluster_size == 3);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(5.0, 2.0);
  std::vector<double> v(200);
  for (auto& x : v) x = z(rng);
  v.push_back(std::numeric_limits<double>::infinity());
  const BootstrapItem b = bootstrap_mean(v, 9);
  CHECK_FALSE(b.min_max);
  CHECK(b.cluster_size == 200);
  const double mean = std::accumulate(v.begin(), v.end() - 1, 0.0) / 200.0;
  double var = 0.0;
  for (std::size_t i = 0; i < 200; ++i) var += (v[i] - mean) * (v[i] - mean) / 199.0;
  CHECK(b.mean == doctest::Approx(mean).epsilon(1e-14));
  CHECK(b.lower < b.mean);
  CHECK(b.upper > b.mean);
  // Percentile interval width against the normal-theory width.
  const double width = 2.0 * 1.96 * std::sqrt(var / 200.0);
  CHECK((b.upper - b.lower) == doctest::Approx(width).epsilon(0.15));
  CHECK(bootstrap_mean(v, 9).lower == b.lower);
  CHECK(std::isnan(bootstrap_mean(std::vector<double>{}, 1).mean));
}

TEST_CASE("response curve sample grid") {
  ChannelSummary c;
  c.name = "tv_S";
  c.coefficient = 100.0;
  c.alpha = 2.0;
  c.inflection = 50.0;
  c.adstock_ratio = 2.0;
  c.mean_spend = 25.0;
  const CurveItem curve = response_curve_points(c);
  REQUIRE(curve.spend.size() == 101);
  CHECK(curve.spend.front() == 0.0);
  CHECK(curve.spend.back() == doctest::Approx(75.0));
  CHECK(curve.response.front() == 0.0);
  for (std::size_t i = 1; i < curve.response.size(); ++i) CHECK(curve.response[i] > curve.response[i - 1]);
  CHECK(curve.mean_response == doctest::Approx(50.0));  // hill at the inflection
}

TEST_CASE("one-pager content agrees with the fit") {
  Fitted f;
  const OnePager p = build_onepager(f.fit, f.sm.context, {});
  CHECK(p.model_id == "1_4_7");
  CHECK_FALSE(p.bootstrap);
  const double predicted = std::accumulate(f.fit.predicted.begin(), f.fit.predicted.end(), 0.0);
  double total = 0.0, share = 0.0;
  for (std::size_t i = 0; i < p.waterfall.size(); ++i) {
    total += p.waterfall[i].total;
    share += p.waterfall[i].share;
    if (i > 0) CHECK(p.waterfall[i].total <= p.waterfall[i - 1].total);
  }
  CHECK(total == doctest::Approx(predicted).epsilon(1e-10));
  CHECK(share == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(p.waterfall.size() == f.fit.predictors.size() + 1);

  REQUIRE(p.shares.size() == 3);
  double spend_total = 0.0, effect_total = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(p.shares[i].efficiency == f.fit.summary.channels[i].roi);
    spend_total += f.fit.summary.channels[i].total_spend;
    effect_total += f.fit.summary.channels[i].total_contribution;
  }
  CHECK(p.total_efficiency == doctest::Approx(effect_total / spend_total));
  for (const auto& im : p.immediate) {
    CHECK(im.immediate_pct + im.carryover_pct == doctest::Approx(100.0));
    CHECK(im.immediate_pct >= 0.0);
  }
  CHECK(p.curves.size() == 3);
  for (std::size_t t = 0; t < p.residual.size(); ++t) CHECK(p.residual[t] == p.actual[t] - p.predicted[t]);
  CHECK(p.header().rfind("NRMSE: train = ", 0) == 0);
  CHECK(p.header().find("DECOMP.RSSD = ") != std::string::npos);
  CHECK(p.header().find("MAPE = NA") != std::string::npos);

  const auto j = nlohmann::json::parse(p.to_json());
  CHECK(j["model_id"] == "1_4_7");
  CHECK(j["share_of_spend_vs_effect"].size() == 3);
  CHECK(j.contains("total_roi"));
}

TEST_CASE("one-pager bootstrap uses the cluster members") {
  Fitted f;
  std::vector<CandidateModel> members(6, f.fit.summary);
  for (std::size_t k = 0; k < members.size(); ++k) members[k].channels[0].roi = 1.0 + 0.1 * static_cast<double>(k);
  const OnePager p = build_onepager(f.fit, f.sm.context, members, 3);
  REQUIRE(p.bootstrap);
  REQUIRE(p.bootstrap->size() == 3);
  CHECK((*p.bootstrap)[0].mean == doctest::Approx(1.25));
  CHECK((*p.bootstrap)[0].cluster_size == 6);
  CHECK((*p.bootstrap)[1].lower == doctest::Approx((*p.bootstrap)[1].upper));
}

TEST_CASE("eight panels and the written files") {
  Fitted f;
  const OnePager p = build_onepager(f.fit, f.sm.context, {});
  const auto panels = onepager_panels(p);
  REQUIRE(panels.size() == 8);
  const std::vector<std::string> files{"waterfall.svg", "fit.svg",       "share.svg",    "bootstrap.svg",
                                       "adstock.svg",   "immediate.svg", "response.svg", "residual.svg"};
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(panels[i].file == files[i]);
    CHECK(well_formed(panels[i].document.str()));
    CHECK(panels[i].document.str().find(svg::escape(panels[i].title)) != std::string::npos);
  }
  CHECK(panels[3].document.str().find("clustering disabled") != std::string::npos);
  CHECK(panels[2].title.find("ROI") != std::string::npos);
  CHECK(panels[4].title.find("Geometric") != std::string::npos);

  mmm::testing::TempDir dir;
  const auto written = render_plots(p, dir.path());
  CHECK(written.size() == 10);
  for (const auto& path : written) CHECK(std::filesystem::file_size(path) > 100);
  CHECK(well_formed(read_text_file(dir / "onepager.svg")));
  CHECK(read_text_file(dir / "onepager.svg").find("1_4_7") != std::string::npos);
  CHECK(nlohmann::json::parse(read_text_file(dir / "onepager.json"))["model_id"] == "1_4_7");
}

TEST_CASE("allocation chart and SVG helpers") {
  AllocationPlan plan;
  plan.model_id = "1_1_1";
  plan.channels.push_back({"tv_S", 100, 50, 200, 150, 300, 250, 1.2, false, false});
  plan.channels.push_back({"ooh_S", 80, 40, 160, 40, 90, 120, 2.0, true, false});
  plan.budget = 190;
  const std::string s = allocation_chart(plan).str();
  CHECK(well_formed(s));
  CHECK(s.find("tv_S") != std::string::npos);
  CHECK(s.find("ooh_S") != std::string::npos);
  CHECK(svg::escape("a<b & \"c\"") == "a&lt;b &amp; &quot;c&quot;");
  CHECK(svg::label(1234567.0) == "1.23M");
  CHECK(svg::coord(1.0 / 3.0) == "0.33");
}
