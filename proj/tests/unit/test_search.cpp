#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "mmm/error.hpp"
#include "mmm/search.hpp"
#include "test_support.hpp"

using namespace mmm;

namespace {

SearchConfig quick_config(std::uint64_t seed = 5) {
  SearchConfig c;
  c.iterations = 96;
  c.trials = 2;
  c.seed = seed;
  c.workers = 1;
  c.weights = {1, 1, 0};
  return c;
}

}  // namespace

TEST_CASE("default hyperparameter bounds per adstock family") {
  const HyperparameterSpace g(AdstockFamily::geometric, {"tv_S", "ooh_S"});
  CHECK(g.names() == std::vector<std::string>{"tv_S_thetas", "tv_S_alphas", "tv_S_gammas", "ooh_S_thetas",
                                              "ooh_S_alphas", "ooh_S_gammas", "lambda"});
  CHECK(g.bounds("tv_S_thetas") == Bounds{0.0, 0.8});
  CHECK(g.bounds("ooh_S_alphas") == Bounds{0.5, 3.0});
  CHECK(g.bounds("ooh_S_gammas") == Bounds{0.3, 1.0});
  CHECK(g.bounds("lambda") == Bounds{0.0, 1.0});

  const HyperparameterSpace c(AdstockFamily::weibull_cdf, {"tv_S"});
  CHECK(c.dimension() == 5);
  CHECK(c.bounds("tv_S_shapes") == Bounds{0.0, 2.0});
  CHECK(c.bounds("tv_S_scales") == Bounds{0.0, 0.1});
  const HyperparameterSpace p(AdstockFamily::weibull_pdf, {"tv_S"});
  CHECK(p.bounds("tv_S_shapes") == Bounds{0.0001, 10.0});
}

TEST_CASE("decode and encode are inverse inside the bounds") {
  const HyperparameterSpace s(AdstockFamily::weibull_pdf, {"a", "b", "c"});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> unit(s.dimension());
    for (auto& v : unit) v = u(rng);
    const HyperparameterVector hp = s.decode(unit);
    const auto back = s.encode(hp);
    for (std::size_t d = 0; d < unit.size(); ++d) CHECK(back[d] == doctest::Approx(unit[d]).epsilon(1e-12));
  }
  const HyperparameterVector clamped = s.decode(std::vector<double>(s.dimension(), 1.7));
  CHECK(clamped.get("a_shapes") == 10.0);
}

TEST_CASE("bound overrides and narrowing") {
  HyperparameterSpace s(AdstockFamily::geometric, {"tv_S"});
  s.set_bounds("tv_S_thetas", {0.1, 0.4});
  CHECK(s.bounds("tv_S_thetas") == Bounds{0.1, 0.4});
  CHECK_THROWS_AS(s.set_bounds("tv_S_thetas", {0.4, 0.4}), InputError);
  CHECK_THROWS_AS(s.set_bounds("radio_S_thetas", {0.1, 0.2}), InputError);

  HyperparameterVector hp = s.decode(std::vector<double>(s.dimension(), 0.5));
  hp.set("tv_S_alphas", 2.9);
  const HyperparameterSpace n = s.narrowed(hp, 0.1);
  CHECK(s.contains(n));
  CHECK(n.bounds("tv_S_thetas").lower == doctest::Approx(0.25 - 0.03));
  CHECK(n.bounds("tv_S_thetas").upper == doctest::Approx(0.25 + 0.03));
  CHECK(n.bounds("tv_S_alphas").upper == 3.0);
  CHECK(n.bounds("tv_S_alphas").lower == doctest::Approx(2.9 - 0.25));
  CHECK_FALSE(n.contains(s));
}

TEST_CASE("search archive layout") {
  auto sm = mmm::testing::simulated_context(mmm::testing::small_simulation(1), 1);
  const HyperparameterSpace space = sm.context.default_space();
  const SearchConfig cfg = quick_config();
  std::ostringstream progress;
  const SearchResult r = run_search(sm.context, space, cfg, &progress);
  CHECK(r.archive.size() == 192);
  CHECK_FALSE(r.calibrated);
  std::set<std::string> ids;
  for (const auto& m : r.archive) {
    ids.insert(m.id);
    CHECK(m.id == candidate_id(m.trial, m.iteration, m.index));
    CHECK(m.index >= 1);
    CHECK(m.index <= SearchConfig::population);
    for (std::size_t d = 0; d < space.dimension(); ++d) {
      CHECK(m.hyperparameters.values[d] >= space.bounds()[d].lower);
      CHECK(m.hyperparameters.values[d] <= space.bounds()[d].upper);
    }
  }
  CHECK(ids.size() == r.archive.size());
  CHECK(r.archive.front().id == "1_1_1");
  CHECK(r.archive.back().id == "2_3_32");
  CHECK(progress.str().find("trial 2 generation 3") != std::string::npos);
  CHECK(&r.find("1_2_5") == &r.archive[r.index_of("1_2_5")]);
  CHECK_THROWS_AS(r.index_of("9_9_9"), InputError);
}

TEST_CASE("archive scalars use the ranges of the whole archive") {
  auto sm = mmm::testing::simulated_context(mmm::testing::small_simulation(1), 1);
  const SearchResult r = run_search(sm.context, sm.context.default_space(), quick_config());
  ObjectiveRanges ranges;
  for (const auto& m : r.archive) {
    if (m.ok) ranges.include(m.scores);
  }
  for (const auto& m : r.archive) {
    if (m.ok) CHECK(m.scores.scalar == doctest::Approx(scalarize(m.scores, r.config.weights, ranges)).epsilon(1e-14));
  }
}

TEST_CASE("same seed reproduces the archive and worker count does not matter") {
  auto sm = mmm::testing::simulated_context(mmm::testing::small_simulation(3), 1);
  const HyperparameterSpace space = sm.context.default_space();
  const SearchResult a = run_search(sm.context, space, quick_config(9));
  SearchConfig parallel = quick_config(9);
  parallel.workers = 3;
  const SearchResult b = run_search(sm.context, space, parallel);
  const SearchResult c = run_search(sm.context, space, quick_config(10));
  REQUIRE(a.archive.size() == b.archive.size());
  for (std::size_t i = 0; i < a.archive.size(); ++i) {
    CHECK(a.archive[i].hyperparameters == b.archive[i].hyperparameters);
    CHECK(a.archive[i].scores.nrmse == b.archive[i].scores.nrmse);
    CHECK(a.archive[i].scores.scalar == b.archive[i].scores.scalar);
  }
  CHECK(a.archive[0].hyperparameters != c.archive[0].hyperparameters);
  // Trials start from different populations.
  CHECK(a.archive[0].hyperparameters != a.archive[96].hyperparameters);
}

TEST_CASE("evolution improves on the initial population") {
  auto sm = mmm::testing::simulated_context(mmm::testing::small_simulation(2), 1);
  SearchConfig cfg = quick_config(4);
  cfg.iterations = 640;
  cfg.trials = 1;
  cfg.weights = {1, 0, 0};
  const SearchResult r = run_search(sm.context, sm.context.default_space(), cfg);
  double first = 1e300, last = 1e300;
  for (const auto& m : r.archive) {
    if (!m.ok) continue;
    if (m.iteration == 1) first = std::min(first, m.scores.nrmse);
    if (m.iteration == 20) last = std::min(last, m.scores.nrmse);
  }
  CHECK(last < first);
}

TEST_CASE("search configuration checks") {
  auto sm = mmm::testing::simulated_context(mmm::testing::small_simulation(1), 1);
  const HyperparameterSpace space = sm.context.default_space();
  SearchConfig c = quick_config();
  c.iterations = 10;
  CHECK_THROWS_AS(run_search(sm.context, space, c), InputError);
  c = quick_config();
  c.calibration_constraint = 0.5;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = quick_config();
  c.trials = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = quick_config();
  c.weights = {1, 1, 1};
  CHECK_THROWS_AS(run_search(sm.context, space, c), InputError);
  CHECK(quick_config().resolved_workers() == 1);
  SearchConfig automatic;
  CHECK(automatic.resolved_workers() >= 1);
}

TEST_CASE("calibrated search scores MAPE.LIFT for every candidate") {
  auto sm = mmm::testing::simulated_context(mmm::testing::small_simulation(1), 1, 2);
  SearchConfig c = quick_config();
  c.weights = {1, 1, 1};
  const SearchResult r = run_search(sm.context, sm.context.default_space(), c);
  CHECK(r.calibrated);
  CHECK(calibration_active(sm.context, c.weights));
  for (const auto& m : r.archive) {
    if (m.ok) CHECK(m.scores.mape_lift.has_value());
  }
  c.weights = {1, 1, 0};
  const SearchResult plain = run_search(sm.context, sm.context.default_space(), c);
  CHECK_FALSE(plain.calibrated);
  CHECK(plain.archive[0].scores.mape_lift.has_value());
}
