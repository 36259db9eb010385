#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmm/cli/app.hpp"
#include "mmm/cli/config.hpp"
#include "mmm/cli/pipeline.hpp"
#include "mmm/csv.hpp"
#include "mmm/error.hpp"
#include "test_support.hpp"

using namespace mmm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "mmm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = mmm::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) { return json::parse(read_text_file(p)); }

const char* kMinimal = R"({
  "dt_input": "data.csv",
  "dep_var": "revenue",
  "paid_media_spends": ["tv_S", "ooh_S"],
  "prophet_vars": ["trend", "season"],
  "iterations": 64,
  "trials": 1
})";

}  // namespace

TEST_CASE("run config parsing") {
  const cli::RunConfig c = cli::parse_run_config(kMinimal, "/data/project");
  CHECK(c.dt_input == fs::path("/data/project/data.csv"));
  CHECK(c.roles.paid_media_vars == c.roles.paid_media_spends);
  CHECK(c.roles.date_var == "DATE");
  CHECK(c.search.iterations == 64);
  CHECK(c.csv_out == "pareto");
  CHECK(c.decomposition.components.size() == 2);

  const cli::RunConfig back = cli::parse_run_config(cli::run_config_to_json(c), "/elsewhere");
  CHECK(back.dt_input == c.dt_input);
  CHECK(back.roles == c.roles);
  CHECK(back.search == c.search);
  CHECK(back.split == c.split);
  CHECK(cli::run_config_to_json(back) == cli::run_config_to_json(c));

  auto with = [](const std::string& key, const std::string& value) {
    json j = json::parse(kMinimal);
    j[key] = json::parse(value);
    return j.dump();
  };
  CHECK_THROWS_AS(cli::parse_run_config(with("unknown_key", "1"), "/"), InputError);
  CHECK_THROWS_AS(cli::parse_run_config(with("optimize_weights", "[1, 1]"), "/"), InputError);
  CHECK_THROWS_AS(cli::parse_run_config(with("csv_out", "\"some\""), "/"), InputError);
  CHECK_THROWS_AS(cli::parse_run_config(with("window_start", "\"2020-01-06\""), "/"), InputError);
  CHECK_THROWS_AS(cli::parse_run_config(with("iterations", "\"many\""), "/"), InputError);
  CHECK_THROWS_AS(cli::parse_run_config(with("iterations", "8"), "/"), InputError);
  CHECK_THROWS_AS(cli::parse_run_config(with("decomposition", R"({"knots": 3})"), "/"), InputError);
  CHECK_THROWS_AS(cli::parse_run_config(with("adstock", "\"delayed\""), "/"), InputError);
  CHECK_THROWS_AS(cli::parse_run_config("[1, 2]", "/"), InputError);
  CHECK_THROWS_AS(cli::parse_run_config("{not json", "/"), InputError);
  CHECK_THROWS_AS(cli::load_run_config("/nonexistent/config.json"), InputError);
  json no_input = json::parse(kMinimal);
  no_input.erase("dt_input");
  CHECK_THROWS_AS(cli::parse_run_config(no_input.dump(), "/"), InputError);
}

TEST_CASE("usage errors and informational flags") {
  CHECK(invoke({"--version"}).code == 0);
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"run"}).code == 2);
  CHECK(invoke({"select", "--run", "x"}).code == 2);
  CHECK(invoke({"simulate", "--periods", "lots"}).code == 2);
  const Result missing = invoke({"validate", "--config", "/nonexistent/config.json"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("error:") == 0);
}

TEST_CASE("simulate, validate, run, select, allocate, response and refresh") {
  mmm::testing::TempDir tmp;
  const std::string sim = (tmp / "sim").string();
  const std::string runs = (tmp / "runs").string();

  Result r = invoke({"--seed", "3", "--out", sim, "simulate", "--periods", "104", "--extra-periods", "13",
                  "--lift-studies", "2"});
  REQUIRE(r.code == 0);
  for (const char* f : {"data.csv", "truth.json", "holidays.csv", "lift_studies.csv", "config.json"}) {
    CHECK(fs::exists(tmp / "sim" / f));
  }
  CHECK(read_csv(tmp / "sim/data.csv").rows.size() == 117);
  CHECK(read_csv(tmp / "sim/lift_studies.csv").rows.size() == 2);
  CHECK(read_json(tmp / "sim/truth.json")["channels"].size() == 3);
  const std::string config = (tmp / "sim/config.json").string();

  r = invoke({"validate", "--config", config, "--json"});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["ok"] == true);

  r = invoke({"--quiet", "--workers", "1", "--out", runs, "run", "--config", config, "--run-id", "r1",
           "--iterations", "96", "--trials", "2"});
  REQUIRE(r.code == 0);
  const fs::path run = tmp / "runs/r1";
  const json manifest = read_json(run / "manifest.json");
  CHECK(manifest["kind"] == "run");
  CHECK(manifest["archive_size"] == 192);
  CHECK(manifest["calibrated"] == true);
  CHECK(manifest["seed"] == 3);
  CHECK(fs::exists(run / "pareto.csv"));
  const std::string best = manifest["lowest_scalar_candidate"].get<std::string>();
  for (const auto& id : manifest["pareto"]["ids"]) {
    CHECK(fs::exists(run / "onepagers" / id.get<std::string>() / "onepager.svg"));
  }
  CHECK(read_csv(run / "pareto.csv").rows.size() == manifest["pareto"]["ids"].size());

  // The same run id gets a fresh directory.
  r = invoke({"--quiet", "--workers", "1", "--out", runs, "run", "--config", config, "--run-id", "r1",
           "--iterations", "64", "--trials", "1", "--weights", "1,1,0"});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(tmp / "runs/r1_2/manifest.json"));
  CHECK(read_json(tmp / "runs/r1_2/manifest.json")["calibrated"] == false);

  // The archive written by the run reads back with the manifest's ids.
  const cli::RunState state = cli::load_run_state(run);
  const auto archive = cli::archive_from_json(read_text_file(run / "archive.json"), state.space);
  CHECK(archive.size() == 192);
  CHECK(archive[0].id == "1_1_1");

  r = invoke({"allocate", "--run", run.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("no selected model") != std::string::npos);

  r = invoke({"select", "--run", run.string(), "--id", "9_9_9"});
  CHECK(r.code == 2);
  r = invoke({"select", "--run", run.string(), "--id", best});
  REQUIRE(r.code == 0);
  const fs::path model = run / "models" / ("RobynModel-" + best + ".json");
  CHECK(fs::exists(model));
  CHECK(cli::selected_model_path(run) == model);

  r = invoke({"allocate", "--run", run.string(), "--low", "0.7", "--up", "1.2,1.5,1.5"});
  REQUIRE(r.code == 0);
  const json plan = read_json(run / "allocations" / ("allocation-" + best + "-max_response.json"));
  CHECK(fs::exists(run / "allocations" / ("allocation-" + best + "-max_response.svg")));
  const std::vector<double> up{1.2, 1.5, 1.5};
  double spend = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto& ch = plan["channels"][c];
    const double hist = ch["historical_spend"].get<double>();
    CHECK(ch["spend"].get<double>() >= 0.7 * hist * (1 - 1e-12));
    CHECK(ch["spend"].get<double>() <= up[c] * hist * (1 + 1e-12));
    spend += ch["spend"].get<double>();
  }
  CHECK(spend == doctest::Approx(plan["budget_per_period"].get<double>()).epsilon(1e-9));

  r = invoke({"allocate", "--model", model.string(), "--scenario", "target_efficiency", "--target", "1.0",
           "--out", (tmp / "alloc").string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(tmp / "alloc" / ("allocation-" + best + "-target_efficiency.json")));
  CHECK(invoke({"allocate", "--run", run.string(), "--scenario", "max_roi"}).code == 2);
  CHECK(invoke({"allocate", "--run", run.string(), "--date-range", "2030-01-01:2030-02-01"}).code == 2);

  r = invoke({"response", "--run", run.string(), "--channel", "tv_S", "--spend", "1000"});
  REQUIRE(r.code == 0);
  const json resp = json::parse(r.out);
  CHECK(resp["channel"] == "tv_S");
  CHECK(resp["spend"] == 1000.0);
  CHECK(resp["response"].get<double>() > 0.0);
  CHECK(invoke({"response", "--run", run.string(), "--channel", "radio_S"}).code == 2);

  r = invoke({"--quiet", "--workers", "1", "refresh", "--run", run.string(), "--iterations", "64", "--run-id", "rf"});
  REQUIRE(r.code == 0);
  const json rm = read_json(tmp / "runs/rf/manifest.json");
  CHECK(rm["kind"] == "refresh");
  CHECK(rm["refresh"]["steps"] == 13);
  CHECK(fs::exists(tmp / "runs/rf/base_model.json"));
  CHECK(fs::exists(tmp / "runs/rf/pareto.csv"));

  CHECK(invoke({"--quiet", "refresh", "--run", run.string(), "--steps", "20", "--iterations", "64"}).code == 2);
}
