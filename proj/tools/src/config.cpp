#include "mmm/cli/config.hpp"

#include <nlohmann/json.hpp>
#include <set>

#include "mmm/csv.hpp"
#include "mmm/error.hpp"

namespace mmm::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kKeys = {
    "dt_input",       "dt_holidays",    "date_var",         "dep_var",         "dep_var_type",
    "prophet_vars",   "prophet_country", "context_vars",    "paid_media_spends", "paid_media_vars",
    "organic_vars",   "factor_vars",    "window_start",     "window_end",      "adstock",
    "hyperparameters", "decomposition", "calibration_input", "iterations",     "trials",
    "ts_validation",  "train_fraction", "optimize_weights", "calibration_constraint", "min_candidates",
    "clusters",       "csv_out",        "plot_pareto",      "seed",            "cores"};

const std::set<std::string> kDecompositionKeys = {"n_changepoints", "changepoint_span", "yearly_fourier_order",
                                                  "weekly_fourier_order", "trend_penalty"};

[[noreturn]] void fail(const std::string& message) { throw InputError("cli", message); }

std::vector<std::string> names(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return {};
  if (j[key].is_string()) return {j[key].get<std::string>()};
  return j[key].get<std::vector<std::string>>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

RunConfig parse(const json& j, const std::filesystem::path& base) {
  if (!j.is_object()) fail("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.count(key)) fail("unknown config key '" + key + "'");
  }
  RunConfig c;
  if (!j.contains("dt_input")) fail("config needs dt_input");
  c.dt_input = resolve(base, j.at("dt_input").get<std::string>());
  if (j.contains("dt_holidays") && !j["dt_holidays"].is_null()) {
    c.dt_holidays = resolve(base, j["dt_holidays"].get<std::string>());
  }

  auto& r = c.roles;
  r.date_var = j.value("date_var", std::string("DATE"));
  if (!j.contains("dep_var")) fail("config needs dep_var");
  r.dep_var = j.at("dep_var").get<std::string>();
  r.dep_var_type = parse_dep_var_type(j.value("dep_var_type", std::string("revenue")));
  r.paid_media_spends = names(j, "paid_media_spends");
  r.paid_media_vars = names(j, "paid_media_vars");
  if (r.paid_media_vars.empty()) r.paid_media_vars = r.paid_media_spends;
  r.organic_vars = names(j, "organic_vars");
  r.context_vars = names(j, "context_vars");
  r.factor_vars = names(j, "factor_vars");
  for (const auto& p : names(j, "prophet_vars")) r.prophet_vars.push_back(parse_prophet_component(p));
  r.prophet_country = j.value("prophet_country", std::string());
  r.validate();

  const bool has_start = j.contains("window_start") && !j["window_start"].is_null();
  const bool has_end = j.contains("window_end") && !j["window_end"].is_null();
  if (has_start != has_end) fail("window_start and window_end go together");
  if (has_start) {
    c.window = DateWindow{Date::parse(j["window_start"].get<std::string>()),
                          Date::parse(j["window_end"].get<std::string>())};
  }
  c.adstock = parse_adstock_family(j.value("adstock", std::string("geometric")));

  if (j.contains("hyperparameters")) {
    for (const auto& [name, b] : j["hyperparameters"].items()) {
      const auto v = b.get<std::vector<double>>();
      if (v.size() != 2) fail("hyperparameter '" + name + "' needs [lower, upper]");
      c.hyperparameters[name] = {v[0], v[1]};
    }
  }

  auto& d = c.decomposition;
  if (j.contains("decomposition")) {
    const auto& dj = j["decomposition"];
    for (const auto& [key, value] : dj.items()) {
      if (!kDecompositionKeys.count(key)) fail("unknown decomposition key '" + key + "'");
    }
    d.n_changepoints = dj.value("n_changepoints", d.n_changepoints);
    d.changepoint_span = dj.value("changepoint_span", d.changepoint_span);
    d.yearly_fourier_order = dj.value("yearly_fourier_order", d.yearly_fourier_order);
    d.weekly_fourier_order = dj.value("weekly_fourier_order", d.weekly_fourier_order);
    d.trend_penalty = dj.value("trend_penalty", d.trend_penalty);
  }
  d.components = r.prophet_vars;
  d.country = r.prophet_country;
  d.validate();

  if (j.contains("calibration_input") && !j["calibration_input"].is_null()) {
    c.calibration_input = resolve(base, j["calibration_input"].get<std::string>());
  }

  c.split.ts_validation = j.value("ts_validation", true);
  c.split.train_fraction = j.value("train_fraction", c.split.train_fraction);
  c.split.validate();

  auto& s = c.search;
  s.iterations = j.value("iterations", s.iterations);
  s.trials = j.value("trials", s.trials);
  if (j.contains("optimize_weights")) {
    const auto w = j["optimize_weights"].get<std::vector<double>>();
    if (w.size() != 3) fail("optimize_weights needs three values (NRMSE, Decomp.RSSD, MAPE.LIFT)");
    s.weights = {w[0], w[1], w[2]};
  }
  s.calibration_constraint = j.value("calibration_constraint", s.calibration_constraint);
  s.min_candidates = j.value("min_candidates", s.min_candidates);
  s.clusters = j.value("clusters", s.clusters);
  s.seed = j.value("seed", s.seed);
  if (j.contains("cores") && !j["cores"].is_null()) s.workers = j["cores"].get<std::size_t>();
  s.validate();

  if (j.contains("csv_out")) {
    c.csv_out = j["csv_out"].is_null() ? std::string() : j["csv_out"].get<std::string>();
  }
  if (!c.csv_out.empty() && c.csv_out != "pareto" && c.csv_out != "all") {
    fail("csv_out must be \"pareto\", \"all\" or null");
  }
  c.plot_pareto = j.value("plot_pareto", true);
  return c;
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return parse(j, base_dir);
  } catch (const json::exception& e) {
    fail(std::string("config field has the wrong type: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail("config file not found: " + path.string());
  return parse_run_config(read_text_file(path), std::filesystem::absolute(path).parent_path());
}

std::string run_config_to_json(const RunConfig& c, int indent) {
  const auto abs = [](const std::filesystem::path& p) { return std::filesystem::absolute(p).lexically_normal().string(); };
  json j;
  j["dt_input"] = abs(c.dt_input);
  j["dt_holidays"] = c.dt_holidays ? json(abs(*c.dt_holidays)) : json(nullptr);
  const auto& r = c.roles;
  j["date_var"] = r.date_var;
  j["dep_var"] = r.dep_var;
  j["dep_var_type"] = to_string(r.dep_var_type);
  std::vector<std::string> prophet;
  for (auto p : r.prophet_vars) prophet.push_back(to_string(p));
  j["prophet_vars"] = prophet;
  j["prophet_country"] = r.prophet_country;
  j["context_vars"] = r.context_vars;
  j["paid_media_spends"] = r.paid_media_spends;
  j["paid_media_vars"] = r.paid_media_vars;
  j["organic_vars"] = r.organic_vars;
  j["factor_vars"] = r.factor_vars;
  j["window_start"] = c.window ? json(c.window->start.iso()) : json(nullptr);
  j["window_end"] = c.window ? json(c.window->end.iso()) : json(nullptr);
  j["adstock"] = to_string(c.adstock);
  json hp = json::object();
  for (const auto& [name, b] : c.hyperparameters) hp[name] = {b.lower, b.upper};
  j["hyperparameters"] = hp;
  const auto& d = c.decomposition;
  j["decomposition"] = {{"n_changepoints", d.n_changepoints},
                        {"changepoint_span", d.changepoint_span},
                        {"yearly_fourier_order", d.yearly_fourier_order},
                        {"weekly_fourier_order", d.weekly_fourier_order},
                        {"trend_penalty", d.trend_penalty}};
  j["calibration_input"] = c.calibration_input ? json(abs(*c.calibration_input)) : json(nullptr);
  const auto& s = c.search;
  j["iterations"] = s.iterations;
  j["trials"] = s.trials;
  j["ts_validation"] = c.split.ts_validation;
  j["train_fraction"] = c.split.train_fraction;
  j["optimize_weights"] = {s.weights.nrmse, s.weights.decomp_rssd, s.weights.mape_lift};
  j["calibration_constraint"] = s.calibration_constraint;
  j["min_candidates"] = s.min_candidates;
  j["clusters"] = s.clusters;
  j["csv_out"] = c.csv_out.empty() ? json(nullptr) : json(c.csv_out);
  j["plot_pareto"] = c.plot_pareto;
  j["seed"] = s.seed;
  j["cores"] = s.workers == 0 ? json(nullptr) : json(s.workers);
  return j.dump(indent);
}

}  // namespace mmm::cli
