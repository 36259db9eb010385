#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "mmm/error.hpp"
#include "mmm/model_io.hpp"
#include "mmm/pareto.hpp"
#include "test_support.hpp"

using namespace mmm;

namespace {

struct Fixture {
  mmm::testing::SimulatedModel sm = mmm::testing::simulated_context(mmm::testing::small_simulation(6), 2, 2);
  SearchResult result;
  std::size_t best = 0;

  Fixture() {
    SearchConfig sc;
    sc.iterations = 64;
    sc.trials = 1;
    sc.workers = 1;
    sc.weights = {1, 1, 1};
    sc.min_candidates = 10;
    result = run_search(sm.context, sm.context.default_space(), sc);
    const ParetoResult p = pareto_fronts(result.archive, pareto_config(result));
    assign_fronts(result.archive, p);
    best = select_best(result.archive, p);
  }
};

void check_close(const CandidateModel& a, const CandidateModel& b, double tol) {
  CHECK(a.scores.nrmse == doctest::Approx(b.scores.nrmse).epsilon(tol));
  CHECK(a.scores.decomp_rssd == doctest::Approx(b.scores.decomp_rssd).epsilon(tol));
  REQUIRE(a.scores.mape_lift);
  REQUIRE(b.scores.mape_lift);
  CHECK(*a.scores.mape_lift == doctest::Approx(*b.scores.mape_lift).epsilon(tol));
  CHECK(a.metrics.train.r2 == doctest::Approx(b.metrics.train.r2).epsilon(tol));
  REQUIRE(a.channels.size() == b.channels.size());
  for (std::size_t i = 0; i < a.channels.size(); ++i) {
    CHECK(a.channels[i].coefficient == doctest::Approx(b.channels[i].coefficient).epsilon(tol));
    CHECK(a.channels[i].roi == doctest::Approx(b.channels[i].roi).epsilon(tol));
  }
}

}  // namespace

TEST_CASE("exported models survive JSON and file round trips") {
  Fixture f;
  const std::string id = f.result.archive[f.best].id;
  const ExportedModel m = export_candidate(f.sm.context, f.result, id);
  CHECK(m.id == id);
  CHECK(m.pareto_front == 1);
  CHECK(m.channels.size() == 3);
  CHECK(m.lift_studies.size() == 2);
  CHECK(m.dates.size() == 104);
  CHECK(m.channel("tv_S").spend_history.size() == 104);
  CHECK_THROWS_AS(m.channel("radio_S"), InputError);

  const std::string text = model_to_json(m);
  const ExportedModel back = model_from_json(text);
  CHECK(model_to_json(back) == text);
  CHECK(back.hyperparameters == m.hyperparameters);
  CHECK(back.space == m.space);
  // Worker count belongs to the machine, not the model.
  SearchConfig expected = m.search;
  expected.workers = back.search.workers;
  CHECK(back.search == expected);
  CHECK(back.lift_studies == m.lift_studies);
  CHECK(back.window.start == m.window.start);

  mmm::testing::TempDir dir;
  const auto path = save_model(m, dir.path());
  CHECK(path.filename() == "RobynModel-" + id + ".json");
  CHECK(model_to_json(load_model(path)) == text);

  double shares = 0.0;
  for (double s : m.effect_shares()) shares += s;
  CHECK(shares == doctest::Approx(1.0));
}

TEST_CASE("imported models rescore to the archived scores") {
  Fixture f;
  mmm::testing::TempDir dir;
  for (std::size_t i : {f.best, std::size_t{0}, std::size_t{33}}) {
    if (!f.result.archive[i].ok) continue;
    const ExportedModel m = export_candidate(f.sm.context, f.result, f.result.archive[i].id);
    const auto path = save_model(m, dir.path());
    const ImportedModel imp = import_model(path, f.sm.context.dataset(), f.sm.sim.holidays);
    check_close(imp.rescored, f.result.archive[i], 1e-9);
    CHECK(imp.rescored.id == m.id);
    CHECK(imp.rescored.scores.scalar == f.result.archive[i].scores.scalar);
  }
}

TEST_CASE("a different dataset is refused unless overridden") {
  Fixture f;
  const ExportedModel m = export_candidate(f.sm.context, f.result, f.result.archive[f.best].id);
  CsvTable changed = f.sm.sim.table;
  changed.rows[10][1] = format_number(parse_number(changed.rows[10][1]).value() + 1.0);
  const MmmDataset other = build_dataset(changed, f.sm.sim.roles, f.sm.sim.window);
  CHECK_THROWS_AS(import_model(m, other, f.sm.sim.holidays), InputError);
  const ImportedModel forced = import_model(m, other, f.sm.sim.holidays, true);
  CHECK(forced.rescored.ok);
  CHECK(forced.rescored.scores.nrmse != f.result.archive[f.best].scores.nrmse);
}

TEST_CASE("response model mirrors the channel summaries") {
  Fixture f;
  const ExportedModel m = export_candidate(f.sm.context, f.result, f.result.archive[f.best].id);
  const ResponseModel r = response_model(m);
  CHECK(r.model_id == m.id);
  REQUIRE(r.channels.size() == 3);
  for (const auto& c : r.channels) {
    const ChannelSummary& s = m.channel(c.name).summary;
    const double spend = s.mean_spend;
    const double v = s.adstock_ratio * spend;
    const double expected = s.coefficient * std::pow(v, s.alpha) / (std::pow(v, s.alpha) + std::pow(s.inflection, s.alpha));
    CHECK(channel_response(r, c.name, spend) == doctest::Approx(expected).epsilon(1e-12));
  }
  const auto means = r.historical_means(std::nullopt);
  CHECK(means[0] == doctest::Approx(m.channel("tv_S").summary.mean_spend));
}

TEST_CASE("malformed model documents are input errors") {
  CHECK_THROWS_AS(model_from_json("{"), InputError);
  CHECK_THROWS_AS(model_from_json("{}"), InputError);
  Fixture f;
  const ExportedModel m = export_candidate(f.sm.context, f.result, f.result.archive[f.best].id);
  auto j = nlohmann::json::parse(model_to_json(m));
  j["schema_version"] = 99;
  CHECK_THROWS_AS(model_from_json(j.dump()), InputError);
  j = nlohmann::json::parse(model_to_json(m));
  j["channels"][0]["spend_history"].erase(0);
  CHECK_THROWS_AS(model_from_json(j.dump()), InputError);
  CHECK_THROWS_AS(load_model("/nonexistent/RobynModel-1_1_1.json"), InputError);

  SearchResult failing = f.result;
  failing.archive[0].ok = false;
  CHECK_THROWS_AS(export_candidate(f.sm.context, failing, failing.archive[0].id), InputError);
}
