#include "mmm/cli/app.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <ostream>

#include "mmm/allocator.hpp"
#include "mmm/cli/config.hpp"
#include "mmm/cli/pipeline.hpp"
#include "mmm/csv.hpp"
#include "mmm/error.hpp"
#include "mmm/plots.hpp"
#include "mmm/simulator.hpp"

namespace mmm::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

[[noreturn]] void fail(const std::string& message) { throw InputError("cli", message); }

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
  bool quiet = false;
};

std::string timestamp_id(const std::string& prefix) {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d_%H%M%S", &tm);
  return prefix + "_" + buf;
}

fs::path fresh_dir(const fs::path& parent, const std::string& id) {
  fs::path dir = parent / id;
  for (int k = 2; fs::exists(dir); ++k) dir = parent / (id + "_" + std::to_string(k));
  fs::create_directories(dir);
  return dir;
}

std::optional<DateWindow> parse_range(const std::string& text) {
  if (text.empty() || text == "all") return std::nullopt;
  const auto colon = text.find(':');
  if (colon == std::string::npos) fail("date range must be START:END or all");
  return DateWindow{Date::parse(text.substr(0, colon)), Date::parse(text.substr(colon + 1))};
}

json pareto_summary(const RunOutput& run) {
  json j;
  j["fronts"] = run.pareto.fronts.size();
  j["candidates"] = run.pareto.size();
  j["calibration_excluded"] = run.pareto.calibration_excluded;
  j["mape_threshold"] = run.pareto.mape_threshold ? json(*run.pareto.mape_threshold) : json(nullptr);
  std::vector<std::string> ids;
  for (std::size_t i : run.pareto.members()) ids.push_back(run.search.archive[i].id);
  j["ids"] = ids;
  j["clusters"] = run.clusters ? json(run.clusters->kmeans.k) : json(nullptr);
  return j;
}

void report_run(std::ostream& out, const fs::path& dir, const RunOutput& run) {
  out << "run directory: " << dir.string() << '\n'
      << "candidates: " << run.search.archive.size() << " (" << run.search.failures() << " failed)\n"
      << "pareto: " << run.pareto.size() << " candidates in " << run.pareto.fronts.size() << " fronts\n"
      << "lowest-scalar front-1 candidate: " << run.best_candidate().id << '\n';
}

// validate

struct ValidateArgs {
  std::string config;
  bool json = false;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  const RunConfig cfg = load_run_config(a.config);
  const MmmDataset ds = load_dataset(cfg.dt_input, cfg.roles, cfg.window);
  const ValidationReport report = validate_dataset(ds, design_width(ds));
  out << (a.json ? report.to_json() : report.to_text());
  if (!a.json && report.ok()) out << "dataset ok: " << ds.window_size() << " periods in window\n";
  return report.ok() ? kExitOk : kExitInput;
}

// run

struct RunArgs {
  std::string config;
  std::string run_id;
  std::vector<double> weights;
  std::optional<int> iterations;
  std::optional<int> trials;
};

int cmd_run(const RunArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_run_config(a.config);
  if (g.seed) cfg.search.seed = *g.seed;
  if (g.workers) cfg.search.workers = *g.workers;
  if (!a.weights.empty()) {
    if (a.weights.size() != 3) fail("--weights needs three values");
    cfg.search.weights = {a.weights[0], a.weights[1], a.weights[2]};
  }
  if (a.iterations) cfg.search.iterations = *a.iterations;
  if (a.trials) cfg.search.trials = *a.trials;
  cfg.search.validate();

  const Inputs inputs = load_inputs(cfg);
  const ValidationReport report = validate_dataset(inputs.dataset, design_width(inputs.dataset));
  if (!report.ok()) {
    err << report.to_text();
    fail("dataset failed validation");
  }
  if (!g.quiet) {
    for (const auto& w : report.warnings) err << "warning: " << w.message << '\n';
  }
  const ModelContext ctx = build_context(cfg, inputs);
  const HyperparameterSpace space = build_space(cfg, ctx);
  const RunOutput run = run_models(ctx, space, cfg.search, g.quiet ? nullptr : &err);

  const fs::path dir = fresh_dir(g.out.value_or("mmm_output"), a.run_id.empty() ? timestamp_id("run") : a.run_id);
  write_run_outputs(dir, ctx, run, cfg.csv_out, cfg.plot_pareto, cfg.search.resolved_workers());

  json m;
  m["kind"] = "run";
  m["tool_version"] = kVersion;
  m["run_id"] = dir.filename().string();
  m["seed"] = cfg.search.seed;
  m["workers"] = cfg.search.resolved_workers();
  m["optimize_weights"] = {cfg.search.weights.nrmse, cfg.search.weights.decomp_rssd, cfg.search.weights.mape_lift};
  m["config"] = json::parse(run_config_to_json(cfg));
  m["dataset_fingerprint"] = dataset_fingerprint(ctx.dataset());
  m["dropped_columns"] = ctx.dropped_columns();
  m["calibrated"] = run.search.calibrated;
  m["archive_size"] = run.search.archive.size();
  m["failures"] = run.search.failures();
  m["pareto"] = pareto_summary(run);
  m["lowest_scalar_candidate"] = run.best_candidate().id;
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
  report_run(out, dir, run);
  return kExitOk;
}

// select

int cmd_select(const std::string& run_dir, const std::string& id, std::ostream& out) {
  const fs::path path = select_model(run_dir, id);
  out << "selected " << id << ": " << path.string() << '\n';
  return kExitOk;
}

// allocate / response

struct ModelArgs {
  std::string model;
  std::string run;
};

fs::path model_path(const ModelArgs& a) {
  if (!a.model.empty()) return a.model;
  if (a.run.empty()) fail("no selected model: pass --model or --run");
  return selected_model_path(a.run);
}

struct AllocateArgs {
  ModelArgs model;
  std::string scenario = "max_response";
  std::optional<double> budget;
  std::optional<double> target;
  std::vector<double> low;
  std::vector<double> up;
  std::string date_range = "all";
  int starts = 10;
};

int cmd_allocate(const AllocateArgs& a, const Globals& g, std::ostream& out) {
  const fs::path path = model_path(a.model);
  const ExportedModel model = load_model(path);
  AllocationProblem p;
  p.scenario = parse_scenario(a.scenario);
  p.date_range = parse_range(a.date_range);
  p.total_budget = a.budget;
  p.target_value = a.target;
  p.channel_constr_low = a.low;
  p.channel_constr_up = a.up;
  p.starts = a.starts;
  p.seed = g.seed.value_or(1);
  const AllocationPlan plan = allocate(response_model(model), p);

  fs::path dir;
  if (g.out) dir = *g.out;
  else if (!a.model.run.empty()) dir = fs::path(a.model.run) / "allocations";
  else dir = path.parent_path() / "allocations";
  fs::create_directories(dir);
  const std::string stem = "allocation-" + model.id + "-" + to_string(p.scenario);
  write_text_file(dir / (stem + ".json"), plan.to_json());
  write_text_file(dir / (stem + ".svg"), allocation_chart(plan).str());

  const bool revenue = plan.dep_var_type == DepVarType::revenue;
  out << "model " << plan.model_id << ", scenario " << to_string(plan.scenario) << ", status " << plan.status << '\n';
  out << std::left << std::setw(16) << "channel" << std::right << std::setw(14) << "historical" << std::setw(14)
      << "optimized" << std::setw(14) << "lower" << std::setw(14) << "upper" << std::setw(14) << "response" << '\n';
  out << std::fixed << std::setprecision(2);
  for (const auto& c : plan.channels) {
    out << std::left << std::setw(16) << c.name << std::right << std::setw(14) << c.historical_spend << std::setw(14)
        << c.spend << std::setw(14) << c.lower << std::setw(14) << c.upper << std::setw(14) << c.response << '\n';
  }
  out << "budget per period " << plan.budget << " over " << plan.periods << " periods; response per period "
      << plan.total_response << " (historical " << plan.historical_response << "); " << (revenue ? "ROAS " : "CPA ")
      << std::setprecision(4) << plan.efficiency << '\n';
  out << "plan: " << (dir / (stem + ".json")).string() << '\n';
  out.unsetf(std::ios::floatfield);
  return kExitOk;
}

struct ResponseArgs {
  ModelArgs model;
  std::string channel;
  std::optional<double> spend;
};

int cmd_response(const ResponseArgs& a, std::ostream& out) {
  const ExportedModel model = load_model(model_path(a.model));
  const ResponseModel rm = response_model(model);
  const ChannelResponse& ch = rm.channel(a.channel);
  double spend = 0.0;
  if (a.spend) {
    spend = *a.spend;
  } else {
    for (double v : ch.spend_history) spend += v;
    spend /= static_cast<double>(std::max<std::size_t>(ch.spend_history.size(), 1));
  }
  json j;
  j["model_id"] = model.id;
  j["channel"] = a.channel;
  j["spend"] = spend;
  j["response"] = channel_response(rm, a.channel, spend);
  j["marginal_response"] = marginal_response(rm, a.channel, spend);
  out << j.dump(2) << '\n';
  return kExitOk;
}

// refresh

struct RefreshArgs {
  ModelArgs model;
  std::string data;
  std::string holidays;
  std::size_t steps = 13;
  int iterations = 1000;
  int trials = 1;
  std::string run_id;
};

int cmd_refresh(const RefreshArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const fs::path path = model_path(a.model);
  const ExportedModel base = load_model(path);
  // A run directory supplies the data and holiday files it was fitted on.
  json run_config;
  if (!a.model.run.empty()) {
    const json manifest = json::parse(read_text_file(fs::path(a.model.run) / "manifest.json"));
    if (manifest.value("kind", std::string()) == "run") run_config = manifest.at("config");
  }
  fs::path data = a.data;
  if (data.empty()) {
    if (!run_config.is_object()) fail("refresh needs --data");
    data = run_config.at("dt_input").get<std::string>();
  }
  std::optional<fs::path> holidays;
  if (!a.holidays.empty()) {
    holidays = fs::absolute(a.holidays);
  } else if (run_config.is_object() && run_config.value("dt_holidays", json()).is_string()) {
    holidays = run_config["dt_holidays"].get<std::string>();
  }

  RefreshConfig rc;
  rc.steps = a.steps;
  rc.iterations = a.iterations;
  rc.trials = a.trials;
  rc.seed = g.seed.value_or(base.search.seed);
  rc.workers = g.workers.value_or(0);
  const CsvTable table = read_csv(data);
  const HolidayTable hol = base.decomposition.has(ProphetComponent::holiday)
                               ? resolve_holidays(holidays, base.decomposition.country, refresh_span(base, rc.steps))
                               : HolidayTable{};
  const RefreshOutput r = refresh_model(base, table, hol, rc, g.quiet ? nullptr : &err);

  const fs::path parent = g.out ? fs::path(*g.out)
                                 : (a.model.run.empty() ? fs::path("mmm_output")
                                                        : fs::absolute(a.model.run).lexically_normal().parent_path());
  const fs::path dir = fresh_dir(parent, a.run_id.empty() ? timestamp_id("refresh") : a.run_id);
  write_text_file(dir / "base_model.json", model_to_json(base));
  write_run_outputs(dir, r.setup.context, r.run, "pareto", true, r.setup.search.resolved_workers());

  json m;
  m["kind"] = "refresh";
  m["tool_version"] = kVersion;
  m["run_id"] = dir.filename().string();
  m["base_model"] = base.id;
  m["seed"] = r.setup.search.seed;
  m["refresh"] = {{"steps", rc.steps},
                  {"iterations", rc.iterations},
                  {"trials", rc.trials},
                  {"seed", *rc.seed},
                  {"workers", rc.workers},
                  {"data", fs::absolute(data).lexically_normal().string()},
                  {"holidays", holidays ? json(holidays->string()) : json(nullptr)}};
  m["window"] = {{"start", r.setup.window.start.iso()}, {"end", r.setup.window.end.iso()}};
  m["reference_effect_shares"] = r.setup.reference_shares;
  m["optimize_weights"] = {r.setup.search.weights.nrmse, r.setup.search.weights.decomp_rssd,
                           r.setup.search.weights.mape_lift};
  m["lift_studies"] = r.setup.context.studies().size();
  m["dataset_fingerprint"] = dataset_fingerprint(r.setup.context.dataset());
  m["archive_size"] = r.run.search.archive.size();
  m["failures"] = r.run.search.failures();
  m["pareto"] = pareto_summary(r.run);
  m["lowest_scalar_candidate"] = r.run.best_candidate().id;
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
  out << "refresh window: " << r.setup.window.start.iso() << " to " << r.setup.window.end.iso() << '\n';
  report_run(out, dir, r.run);
  return kExitOk;
}

// simulate

struct SimulateArgs {
  std::size_t periods = 208;
  std::size_t extra = 0;
  std::string frequency = "weekly";
  std::size_t channels = 3;
  double noise = 0.05;
  std::string adstock = "geometric";
  std::string country = "DE";
  std::string start;
  bool organic = false;
  bool context = false;
  bool events = false;
  bool exposure = false;
  std::size_t lift_studies = 0;
  std::size_t lift_length = 8;
};

int cmd_simulate(const SimulateArgs& a, const Globals& g, std::ostream& out) {
  SimulationConfig sc;
  sc.n_periods = a.periods;
  sc.extra_periods = a.extra;
  sc.frequency = parse_frequency(a.frequency);
  sc.channels = a.channels;
  sc.seed = g.seed.value_or(1);
  sc.noise_fraction = a.noise;
  sc.family = parse_adstock_family(a.adstock);
  if (!a.start.empty()) sc.start = Date::parse(a.start);
  sc.country = a.country == "none" ? std::string() : a.country;
  sc.organic = a.organic;
  sc.context = a.context;
  sc.events = a.events;
  sc.exposure = a.exposure;
  const Simulation sim = simulate(sc);

  const fs::path dir = fs::absolute(g.out.value_or("simulated"));
  fs::create_directories(dir);
  write_csv(dir / "data.csv", sim.table);
  write_text_file(dir / "truth.json", sim.truth_json());

  RunConfig cfg;
  cfg.dt_input = dir / "data.csv";
  if (!sim.holidays.empty()) {
    write_csv(dir / "holidays.csv", sim.holidays.to_table());
    cfg.dt_holidays = dir / "holidays.csv";
  }
  if (a.lift_studies > 0) {
    const auto studies = sim.cut_lift_studies(a.lift_studies, a.lift_length, sc.seed);
    write_csv(dir / "lift_studies.csv", lift_studies_to_table(studies));
    cfg.calibration_input = dir / "lift_studies.csv";
  }
  cfg.roles = sim.roles;
  cfg.window = sim.window;
  cfg.adstock = sc.family;
  cfg.decomposition.components = sim.roles.prophet_vars;
  cfg.decomposition.country = sim.roles.prophet_country;
  cfg.search.seed = sc.seed;
  if (!cfg.calibration_input) cfg.search.weights.mape_lift = 0.0;
  write_text_file(dir / "config.json", run_config_to_json(cfg) + "\n");

  out << "simulated " << sim.dates.size() << " " << to_string(sim.frequency) << " periods, "
      << sim.truth.channels.size() << " channels: " << dir.string() << '\n';
  for (const auto& c : sim.truth.channels) out << "  " << c.name << " true ROAS " << c.true_roas << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Marketing mix modeling: validate, run, select, allocate, response, refresh, simulate", "mmm"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Random seed (overrides the config)");
  app.add_option("--workers", g.workers, "Parallel workers (0: available parallelism - 1)");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--quiet", g.quiet, "No progress output");

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Check a dataset against its run config");
  validate->add_option("--config", va.config, "Run config JSON")->required();
  validate->add_flag("--json", va.json, "Machine-readable report");

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Decompose, search, build Pareto fronts, cluster and write one-pagers");
  run->add_option("--config", ra.config, "Run config JSON")->required();
  run->add_option("--run-id", ra.run_id, "Run directory name (default: timestamp)");
  run->add_option("--weights", ra.weights, "Objective weights NRMSE,DECOMP.RSSD,MAPE.LIFT")->delimiter(',');
  run->add_option("--iterations", ra.iterations, "Evaluations per trial");
  run->add_option("--trials", ra.trials, "Independent trials");

  std::string select_run, select_id;
  auto* select = app.add_subcommand("select", "Export one candidate of a run as the selected model");
  select->add_option("--run", select_run, "Run directory")->required();
  select->add_option("--id,--model-id", select_id, "Candidate id, e.g. 1_122_7")->required();

  AllocateArgs aa;
  auto* allocate = app.add_subcommand("allocate", "Budget allocation for the selected model");
  allocate->add_option("--model", aa.model.model, "Exported model JSON");
  allocate->add_option("--run", aa.model.run, "Run directory with a selected model");
  allocate->add_option("--scenario", aa.scenario, "max_response or target_efficiency");
  allocate->add_option("--budget", aa.budget, "Total budget over the date range");
  allocate->add_option("--target", aa.target, "ROAS floor (revenue) or CPA ceiling (conversion)");
  allocate->add_option("--low", aa.low, "Lower spend multipliers, one or per channel")->delimiter(',');
  allocate->add_option("--up", aa.up, "Upper spend multipliers, one or per channel")->delimiter(',');
  allocate->add_option("--date-range", aa.date_range, "START:END or all");
  allocate->add_option("--starts", aa.starts, "Solver starting points");

  ResponseArgs sa;
  auto* response = app.add_subcommand("response", "Response and marginal response of one channel");
  response->add_option("--model", sa.model.model, "Exported model JSON");
  response->add_option("--run", sa.model.run, "Run directory with a selected model");
  response->add_option("--channel", sa.channel, "Paid media spend column")->required();
  response->add_option("--spend", sa.spend, "Spend per period (default: historical mean)");

  RefreshArgs fa;
  auto* refresh = app.add_subcommand("refresh", "Re-estimate the selected model on a shifted window");
  refresh->add_option("--model", fa.model.model, "Exported model JSON");
  refresh->add_option("--run", fa.model.run, "Run directory with a selected model");
  refresh->add_option("--data", fa.data, "Data CSV covering the shifted window");
  refresh->add_option("--holidays", fa.holidays, "Holiday CSV (default: built-in)");
  refresh->add_option("--steps", fa.steps, "Periods to advance the window");
  refresh->add_option("--iterations", fa.iterations, "Evaluations per trial");
  refresh->add_option("--trials", fa.trials, "Independent trials");
  refresh->add_option("--run-id", fa.run_id, "Run directory name (default: timestamp)");

  SimulateArgs ma;
  auto* sim = app.add_subcommand("simulate", "Synthetic dataset with known ground truth");
  sim->add_option("--periods", ma.periods, "Periods in the modeling window");
  sim->add_option("--extra-periods", ma.extra, "Periods after the window, for refresh");
  sim->add_option("--frequency", ma.frequency, "weekly or daily");
  sim->add_option("--channels", ma.channels, "Paid media channels");
  sim->add_option("--noise", ma.noise, "Noise sd as a fraction of the response sd");
  sim->add_option("--adstock", ma.adstock, "geometric, weibull_cdf or weibull_pdf");
  sim->add_option("--country", ma.country, "Holiday country (DE, US or none)");
  sim->add_option("--start", ma.start, "First date");
  sim->add_flag("--organic", ma.organic, "Add a newsletter organic variable");
  sim->add_flag("--context", ma.context, "Add a competitor_sales_B context variable");
  sim->add_flag("--events", ma.events, "Add an events factor");
  sim->add_flag("--exposure", ma.exposure, "Add facebook_I impressions");
  sim->add_option("--lift-studies", ma.lift_studies, "Lift studies to cut from the ground truth");
  sim->add_option("--lift-length", ma.lift_length, "Periods per lift study");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (*validate) return cmd_validate(va, out);
    if (*run) return cmd_run(ra, g, out, err);
    if (*select) return cmd_select(select_run, select_id, out);
    if (*allocate) return cmd_allocate(aa, g, out);
    if (*response) return cmd_response(sa, out);
    if (*refresh) return cmd_refresh(fa, g, out, err);
    if (*sim) return cmd_simulate(ma, g, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace mmm::cli
