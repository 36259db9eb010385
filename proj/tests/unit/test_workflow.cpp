#include <doctest.h>

#include <set>
#include <sstream>

#include "mmm/error.hpp"
#include "mmm/workflow.hpp"
#include "test_support.hpp"

using namespace mmm;

namespace {

SearchConfig small_search() {
  SearchConfig sc;
  sc.iterations = 128;
  sc.trials = 2;
  sc.workers = 1;
  sc.weights = {1, 1, 0};
  sc.min_candidates = 20;
  return sc;
}

// A model exported from a 104-week window of a simulation that runs 20 weeks
// further.
struct Exported {
  mmm::testing::SimulatedModel sm;
  RunOutput run;
  ExportedModel model;

  explicit Exported(std::size_t lift_studies = 0) : sm(make(lift_studies)) {
    SearchConfig sc = small_search();
    if (lift_studies > 0) sc.weights = {1, 1, 1};
    run = run_models(sm.context, sm.context.default_space(), sc);
    model = export_candidate(sm.context, run.search, run.best_candidate().id);
  }

  static mmm::testing::SimulatedModel make(std::size_t lift_studies) {
    SimulationConfig sc = mmm::testing::small_simulation(7);
    sc.extra_periods = 20;
    return mmm::testing::simulated_context(sc, 2, lift_studies);
  }
};

}  // namespace

TEST_CASE("run output picks the lowest-scalar front-1 candidate and clusters the fronts") {
  auto sm = mmm::testing::simulated_context(mmm::testing::small_simulation(2), 2);
  std::ostringstream progress;
  const RunOutput out = run_models(sm.context, sm.context.default_space(), small_search(), &progress);
  const auto& best = out.best_candidate();
  CHECK(best.pareto_front == 1);
  for (std::size_t i : out.pareto.fronts[0]) CHECK(best.scores.scalar <= out.search.archive[i].scores.scalar);
  REQUIRE(out.clusters);
  std::set<std::size_t> members;
  for (std::size_t i : out.pareto.members()) members.insert(i);
  for (std::size_t i = 0; i < out.search.archive.size(); ++i) {
    CHECK(out.search.archive[i].cluster.has_value() == (members.count(i) == 1));
    if (out.search.archive[i].cluster) {
      CHECK(*out.search.archive[i].cluster >= 1);
      CHECK(*out.search.archive[i].cluster <= static_cast<int>(out.clusters->kmeans.k));
    }
  }
  CHECK(progress.str().find("selected " + best.id) != std::string::npos);

  SearchConfig plain = small_search();
  plain.clusters = false;
  const RunOutput no_clusters = run_models(sm.context, sm.context.default_space(), plain);
  CHECK_FALSE(no_clusters.clusters);
  CHECK_FALSE(no_clusters.best_candidate().cluster);
}

TEST_CASE("candidate table columns and ordering") {
  auto sm = mmm::testing::simulated_context(mmm::testing::small_simulation(2), 2);
  const RunOutput out = run_models(sm.context, sm.context.default_space(), small_search());
  const auto members = out.pareto.members();
  const CsvTable t = candidates_table(out.search, members, DepVarType::revenue);
  CHECK(t.rows.size() == members.size());
  CHECK(t.header.front() == "solID");
  CHECK(t.column_index("robynPareto"));
  CHECK(t.column_index("tv_S_thetas"));
  CHECK(t.column_index("lambda"));
  CHECK(t.column_index("ooh_S_roi"));
  CHECK(t.header.size() == 17 + out.search.space.dimension() + 3);
  const std::size_t front = *t.column_index("robynPareto");
  const std::size_t scalar = *t.column_index("scalar");
  for (std::size_t r = 1; r < t.rows.size(); ++r) {
    const int f0 = std::stoi(t.rows[r - 1][front]), f1 = std::stoi(t.rows[r][front]);
    CHECK(f0 <= f1);
    if (f0 == f1) CHECK(*parse_number(t.rows[r - 1][scalar]) <= *parse_number(t.rows[r][scalar]));
  }
  CHECK(t.rows[0][0] == out.best_candidate().id);

  const std::vector<std::size_t> all{0, 1, 2};
  const CsvTable conv = candidates_table(out.search, all, DepVarType::conversion);
  CHECK(conv.column_index("tv_S_cpa"));
}

TEST_CASE("refresh shifts the window and narrows the bounds") {
  Exported e;
  RefreshConfig cfg;
  cfg.steps = 13;
  cfg.iterations = 64;
  const RefreshSetup s = prepare_refresh(e.model, e.sm.sim.table, e.sm.sim.holidays, cfg);
  CHECK(s.window.start == e.model.window.start + 91);
  CHECK(s.window.end == e.model.window.end + 91);
  CHECK(s.context.dataset().window_size() == 104);
  CHECK(s.context.dataset().window_begin() == 13);
  CHECK(e.model.space.contains(s.space));
  for (std::size_t d = 0; d < s.space.dimension(); ++d) {
    const Bounds& b = s.space.bounds()[d];
    const Bounds& o = e.model.space.bounds()[d];
    const double v = e.model.hyperparameters.values[d];
    CHECK(b.lower == doctest::Approx(std::max(o.lower, v - 0.1 * o.width())));
    CHECK(b.upper == doctest::Approx(std::min(o.upper, v + 0.1 * o.width())));
  }
  CHECK(s.reference_shares == e.model.effect_shares());
  CHECK(s.context.rssd_reference() == e.model.effect_shares());
  CHECK(s.search.iterations == 64);
  CHECK(s.search.trials == 1);
  CHECK(s.search.seed == e.model.search.seed);

  cfg.seed = 99;
  CHECK(prepare_refresh(e.model, e.sm.sim.table, e.sm.sim.holidays, cfg).search.seed == 99);
}

TEST_CASE("refresh runs inside the narrowed space") {
  Exported e;
  RefreshConfig cfg;
  cfg.steps = 13;
  cfg.iterations = 64;
  cfg.workers = 1;
  const RefreshOutput out = refresh_model(e.model, e.sm.sim.table, e.sm.sim.holidays, cfg);
  CHECK(out.run.search.archive.size() == 64);
  for (const auto& m : out.run.search.archive) {
    for (std::size_t d = 0; d < out.setup.space.dimension(); ++d) {
      CHECK(m.hyperparameters.values[d] >= out.setup.space.bounds()[d].lower);
      CHECK(m.hyperparameters.values[d] <= out.setup.space.bounds()[d].upper);
    }
  }
  const CandidateModel& best = out.run.best_candidate();
  std::vector<double> effect;
  for (const auto& c : best.channels) effect.push_back(c.effect_share);
  CHECK(best.scores.decomp_rssd == doctest::Approx(decomp_rssd(effect, e.model.effect_shares())).epsilon(1e-12));
}

TEST_CASE("lift studies outside the refreshed window are dropped") {
  Exported e(2);
  ExportedModel model = e.model;
  // Place one study in the first weeks of the old window, which the shifted window leaves.
  model.lift_studies[0].lift_start = model.window.start;
  model.lift_studies[0].lift_end = model.window.start + 21;
  model.lift_studies[1].lift_start = model.window.end - 21;
  model.lift_studies[1].lift_end = model.window.end;
  RefreshConfig cfg;
  cfg.iterations = 64;
  const RefreshSetup s = prepare_refresh(model, e.sm.sim.table, e.sm.sim.holidays, cfg);
  CHECK(s.context.studies().size() == 1);
  CHECK(s.search.weights.mape_lift == 1.0);

  model.lift_studies.pop_back();
  const RefreshSetup none = prepare_refresh(model, e.sm.sim.table, e.sm.sim.holidays, cfg);
  CHECK_FALSE(none.context.has_studies());
  CHECK(none.search.weights.mape_lift == 0.0);
}

TEST_CASE("refresh input errors") {
  Exported e;
  RefreshConfig cfg;
  cfg.steps = 21;
  CHECK_THROWS_AS(prepare_refresh(e.model, e.sm.sim.table, e.sm.sim.holidays, cfg), InputError);
  cfg.steps = 0;
  CHECK_THROWS_AS(prepare_refresh(e.model, e.sm.sim.table, e.sm.sim.holidays, cfg), InputError);
  cfg.steps = 13;
  CsvTable missing = e.sm.sim.table;
  missing.header[2] = "radio_S";
  CHECK_THROWS_AS(prepare_refresh(e.model, missing, e.sm.sim.holidays, cfg), InputError);
}
