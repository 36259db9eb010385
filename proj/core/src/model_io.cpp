#include "mmm/model_io.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "mmm/csv.hpp"
#include "mmm/error.hpp"

namespace mmm {

using nlohmann::json;

namespace {

// Non-finite values have no JSON form; they are written as null and read
// back as +infinity.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double get_num(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

json opt_num(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

std::optional<double> get_opt_num(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json roles_json(const VariableRoles& r) {
  json comps = json::array();
  for (auto c : r.prophet_vars) comps.push_back(to_string(c));
  return {{"date_var", r.date_var},
          {"dep_var", r.dep_var},
          {"dep_var_type", to_string(r.dep_var_type)},
          {"paid_media_spends", r.paid_media_spends},
          {"paid_media_vars", r.paid_media_vars},
          {"organic_vars", r.organic_vars},
          {"context_vars", r.context_vars},
          {"factor_vars", r.factor_vars},
          {"prophet_vars", comps},
          {"prophet_country", r.prophet_country}};
}

VariableRoles roles_from(const json& j) {
  VariableRoles r;
  r.date_var = j.at("date_var").get<std::string>();
  r.dep_var = j.at("dep_var").get<std::string>();
  r.dep_var_type = parse_dep_var_type(j.at("dep_var_type").get<std::string>());
  r.paid_media_spends = j.at("paid_media_spends").get<std::vector<std::string>>();
  r.paid_media_vars = j.at("paid_media_vars").get<std::vector<std::string>>();
  r.organic_vars = j.at("organic_vars").get<std::vector<std::string>>();
  r.context_vars = j.at("context_vars").get<std::vector<std::string>>();
  r.factor_vars = j.at("factor_vars").get<std::vector<std::string>>();
  for (const auto& c : j.at("prophet_vars")) r.prophet_vars.push_back(parse_prophet_component(c.get<std::string>()));
  r.prophet_country = j.at("prophet_country").get<std::string>();
  return r;
}

json split_metrics_json(const SplitMetrics& m) {
  return {{"n", m.n}, {"nrmse", num(m.nrmse)}, {"r2", num(m.r2)}, {"adj_r2", num(m.adj_r2)}};
}

SplitMetrics split_metrics_from(const json& j) {
  return {j.at("n").get<std::size_t>(), get_num(j.at("nrmse")), get_num(j.at("r2")), get_num(j.at("adj_r2"))};
}

json channel_json(const ExportedChannel& c) {
  const auto& s = c.summary;
  return {{"name", s.name},
          {"paid", s.paid},
          {"theta", num(s.theta)},
          {"shape", num(s.shape)},
          {"scale", num(s.scale)},
          {"alpha", num(s.alpha)},
          {"gamma", num(s.gamma)},
          {"inflection", num(s.inflection)},
          {"adstock_ratio", num(s.adstock_ratio)},
          {"coefficient", num(s.coefficient)},
          {"total_spend", num(s.total_spend)},
          {"mean_spend", num(s.mean_spend)},
          {"total_contribution", num(s.total_contribution)},
          {"immediate_contribution", num(s.immediate_contribution)},
          {"effect_share", num(s.effect_share)},
          {"spend_share", num(s.spend_share)},
          {"roi", num(s.roi)},
          {"cpa", num(s.cpa)},
          {"lag_weights", c.lag_weights},
          {"spend_history", c.spend_history}};
}

ExportedChannel channel_from(const json& j) {
  ExportedChannel c;
  auto& s = c.summary;
  s.name = j.at("name").get<std::string>();
  s.paid = j.at("paid").get<bool>();
  s.theta = get_num(j.at("theta"));
  s.shape = get_num(j.at("shape"));
  s.scale = get_num(j.at("scale"));
  s.alpha = get_num(j.at("alpha"));
  s.gamma = get_num(j.at("gamma"));
  s.inflection = get_num(j.at("inflection"));
  s.adstock_ratio = get_num(j.at("adstock_ratio"));
  s.coefficient = get_num(j.at("coefficient"));
  s.total_spend = get_num(j.at("total_spend"));
  s.mean_spend = get_num(j.at("mean_spend"));
  s.total_contribution = get_num(j.at("total_contribution"));
  s.immediate_contribution = get_num(j.at("immediate_contribution"));
  s.effect_share = get_num(j.at("effect_share"));
  s.spend_share = get_num(j.at("spend_share"));
  s.roi = get_num(j.at("roi"));
  s.cpa = get_num(j.at("cpa"));
  c.lag_weights = j.at("lag_weights").get<Series>();
  c.spend_history = j.at("spend_history").get<Series>();
  return c;
}

}  // namespace

const ExportedChannel& ExportedModel::channel(std::string_view name) const {
  for (const auto& c : channels) {
    if (c.summary.name == name) return c;
  }
  throw InputError("reporting", "unknown channel '" + std::string(name) + "'");
}

std::vector<double> ExportedModel::effect_shares() const {
  std::vector<double> out;
  for (const auto& c : channels) {
    if (c.summary.paid) out.push_back(c.summary.effect_share);
  }
  return out;
}

ExportedModel export_candidate(const ModelContext& ctx, const SearchResult& result, std::string_view id) {
  const CandidateModel& stored = result.find(id);
  if (!stored.ok) throw InputError("reporting", "candidate '" + std::string(id) + "' failed to fit");
  const FittedModel fit = fit_candidate(ctx, result.space, stored.hyperparameters);
  const auto& ds = ctx.dataset();

  ExportedModel m;
  m.id = stored.id;
  m.dataset_fingerprint = dataset_fingerprint(ds);
  m.frequency = ds.frequency();
  m.roles = ds.roles();
  m.window = ds.window();
  m.max_lag = ctx.max_lag();
  m.decomposition = ctx.decomposition().config;
  m.split = ctx.spec().split;
  m.space = result.space;
  m.hyperparameters = stored.hyperparameters;
  m.lambda = fit.summary.lambda;
  m.intercept = fit.summary.intercept;
  m.response_mean = fit.summary.response_mean;
  m.response_sd = fit.summary.response_sd;
  m.coefficients = fit.summary.coefficients;
  for (std::size_t i = 0; i < fit.summary.channels.size(); ++i) {
    const auto& name = fit.summary.channels[i].name;
    auto hist = ds.window_column(name);
    m.channels.push_back({fit.summary.channels[i], fit.transforms[i].lag_weights, Series(hist.begin(), hist.end())});
  }
  m.dates = fit.dates;
  m.scores = stored.scores;
  m.metrics = fit.summary.metrics;
  m.search = result.config;
  m.lift_studies = ctx.studies();
  m.reference_effect_shares = ctx.spec().reference_shares;
  m.pareto_front = stored.pareto_front;
  m.cluster = stored.cluster;
  return m;
}

std::string model_to_json(const ExportedModel& m) {
  json j;
  j["schema_version"] = m.schema_version;
  j["id"] = m.id;
  j["dataset_fingerprint"] = m.dataset_fingerprint;
  j["frequency"] = to_string(m.frequency);
  j["roles"] = roles_json(m.roles);
  j["window"] = {{"start", m.window.start.iso()}, {"end", m.window.end.iso()}};
  j["adstock"] = to_string(m.space.family());
  j["max_lag"] = m.max_lag;
  json comps = json::array();
  for (auto c : m.decomposition.components) comps.push_back(to_string(c));
  j["decomposition"] = {{"components", comps},
                        {"country", m.decomposition.country},
                        {"n_changepoints", m.decomposition.n_changepoints},
                        {"changepoint_span", m.decomposition.changepoint_span},
                        {"yearly_fourier_order", m.decomposition.yearly_fourier_order},
                        {"weekly_fourier_order", m.decomposition.weekly_fourier_order},
                        {"trend_penalty", m.decomposition.trend_penalty}};
  j["split"] = {{"train_fraction", m.split.train_fraction}, {"ts_validation", m.split.ts_validation}};
  json hp = json::array();
  for (std::size_t i = 0; i < m.space.dimension(); ++i) {
    const auto& name = m.space.names()[i];
    hp.push_back({{"name", name},
                  {"value", m.hyperparameters.get(name)},
                  {"lower", m.space.bounds()[i].lower},
                  {"upper", m.space.bounds()[i].upper}});
  }
  j["hyperparameters"] = hp;
  j["channels_order"] = m.space.channels();
  j["lambda"] = num(m.lambda);
  j["intercept"] = num(m.intercept);
  j["response_standardization"] = {{"mean", num(m.response_mean)}, {"sd", num(m.response_sd)}};
  json coefs = json::array();
  for (const auto& c : m.coefficients) {
    coefs.push_back({{"name", c.name},
                     {"group", to_string(c.group)},
                     {"standardized", num(c.standardized)},
                     {"value", num(c.value)},
                     {"mean", num(c.mean)},
                     {"sd", num(c.sd)}});
  }
  j["coefficients"] = coefs;
  json chans = json::array();
  for (const auto& c : m.channels) chans.push_back(channel_json(c));
  j["channels"] = chans;
  json dates = json::array();
  for (const auto& d : m.dates) dates.push_back(d.iso());
  j["dates"] = dates;
  j["scores"] = {{"nrmse", num(m.scores.nrmse)},
                 {"decomp_rssd", num(m.scores.decomp_rssd)},
                 {"mape_lift", opt_num(m.scores.mape_lift)},
                 {"scalar", num(m.scores.scalar)}};
  json metrics = {{"train", split_metrics_json(m.metrics.train)}};
  metrics["val"] = m.metrics.val ? split_metrics_json(*m.metrics.val) : json(nullptr);
  metrics["test"] = m.metrics.test ? split_metrics_json(*m.metrics.test) : json(nullptr);
  j["metrics"] = metrics;
  j["search"] = {{"iterations", m.search.iterations},
                 {"trials", m.search.trials},
                 {"seed", m.search.seed},
                 {"optimize_weights", {m.search.weights.nrmse, m.search.weights.decomp_rssd, m.search.weights.mape_lift}},
                 {"calibration_constraint", m.search.calibration_constraint},
                 {"min_candidates", m.search.min_candidates},
                 {"clusters", m.search.clusters},
                 {"population", SearchConfig::population},
                 {"mutation", SearchConfig::mutation},
                 {"crossover", SearchConfig::crossover}};
  json studies = json::array();
  for (const auto& s : m.lift_studies) {
    studies.push_back({{"channel", s.channel_label()},
                       {"liftStartDate", s.lift_start.iso()},
                       {"liftEndDate", s.lift_end.iso()},
                       {"liftAbs", s.lift_abs},
                       {"spend", s.spend},
                       {"confidence", s.confidence},
                       {"metric", s.metric},
                       {"calibration_scope", to_string(s.scope)}});
  }
  j["calibration_input"] = studies;
  j["reference_effect_shares"] =
      m.reference_effect_shares ? json(*m.reference_effect_shares) : json(nullptr);
  j["pareto_front"] = m.pareto_front ? json(*m.pareto_front) : json(nullptr);
  j["cluster"] = m.cluster ? json(*m.cluster) : json(nullptr);
  return j.dump(2) + "\n";
}

ExportedModel model_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError("reporting", std::string("corrupt model file: ") + e.what());
  }
  ExportedModel m;
  try {
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != kModelSchemaVersion) {
      throw InputError("reporting", "unsupported model schema version " + std::to_string(m.schema_version));
    }
    m.id = j.at("id").get<std::string>();
    m.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
    m.frequency = parse_frequency(j.at("frequency").get<std::string>());
    m.roles = roles_from(j.at("roles"));
    m.window = {Date::parse(j.at("window").at("start").get<std::string>()),
                Date::parse(j.at("window").at("end").get<std::string>())};
    m.max_lag = j.at("max_lag").get<std::size_t>();
    const auto& d = j.at("decomposition");
    for (const auto& c : d.at("components")) m.decomposition.components.push_back(parse_prophet_component(c.get<std::string>()));
    m.decomposition.country = d.at("country").get<std::string>();
    m.decomposition.n_changepoints = d.at("n_changepoints").get<int>();
    m.decomposition.changepoint_span = d.at("changepoint_span").get<double>();
    m.decomposition.yearly_fourier_order = d.at("yearly_fourier_order").get<int>();
    m.decomposition.weekly_fourier_order = d.at("weekly_fourier_order").get<int>();
    m.decomposition.trend_penalty = d.at("trend_penalty").get<double>();
    m.split.train_fraction = j.at("split").at("train_fraction").get<double>();
    m.split.ts_validation = j.at("split").at("ts_validation").get<bool>();

    m.space = HyperparameterSpace(parse_adstock_family(j.at("adstock").get<std::string>()),
                                  j.at("channels_order").get<std::vector<std::string>>());
    m.hyperparameters.names = m.space.names();
    m.hyperparameters.values.assign(m.space.dimension(), 0.0);
    const auto& hp = j.at("hyperparameters");
    if (hp.size() != m.space.dimension()) throw InputError("reporting", "hyperparameter list does not match channels");
    for (const auto& h : hp) {
      const auto name = h.at("name").get<std::string>();
      m.space.set_bounds(name, {h.at("lower").get<double>(), h.at("upper").get<double>()});
      m.hyperparameters.set(name, h.at("value").get<double>());
    }
    m.lambda = get_num(j.at("lambda"));
    m.intercept = get_num(j.at("intercept"));
    m.response_mean = get_num(j.at("response_standardization").at("mean"));
    m.response_sd = get_num(j.at("response_standardization").at("sd"));
    for (const auto& c : j.at("coefficients")) {
      m.coefficients.push_back({c.at("name").get<std::string>(), parse_column_group(c.at("group").get<std::string>()),
                                get_num(c.at("standardized")), get_num(c.at("value")), get_num(c.at("mean")),
                                get_num(c.at("sd"))});
    }
    for (const auto& c : j.at("channels")) m.channels.push_back(channel_from(c));
    for (const auto& dt : j.at("dates")) m.dates.push_back(Date::parse(dt.get<std::string>()));
    const auto& s = j.at("scores");
    m.scores.nrmse = get_num(s.at("nrmse"));
    m.scores.decomp_rssd = get_num(s.at("decomp_rssd"));
    m.scores.mape_lift = get_opt_num(s.at("mape_lift"));
    m.scores.scalar = get_num(s.at("scalar"));
    const auto& mt = j.at("metrics");
    m.metrics.train = split_metrics_from(mt.at("train"));
    if (!mt.at("val").is_null()) m.metrics.val = split_metrics_from(mt.at("val"));
    if (!mt.at("test").is_null()) m.metrics.test = split_metrics_from(mt.at("test"));
    const auto& sc = j.at("search");
    m.search.iterations = sc.at("iterations").get<int>();
    m.search.trials = sc.at("trials").get<int>();
    m.search.seed = sc.at("seed").get<std::uint64_t>();
    const auto w = sc.at("optimize_weights").get<std::vector<double>>();
    if (w.size() != 3) throw InputError("reporting", "optimize_weights needs three values");
    m.search.weights = {w[0], w[1], w[2]};
    m.search.calibration_constraint = sc.at("calibration_constraint").get<double>();
    m.search.min_candidates = sc.at("min_candidates").get<std::size_t>();
    m.search.clusters = sc.at("clusters").get<bool>();
    CsvTable studies;
    studies.header = {"channel", "liftStartDate", "liftEndDate", "liftAbs", "spend", "confidence", "metric",
                      "calibration_scope"};
    for (const auto& st : j.at("calibration_input")) {
      studies.rows.push_back({st.at("channel").get<std::string>(), st.at("liftStartDate").get<std::string>(),
                              st.at("liftEndDate").get<std::string>(), format_number(st.at("liftAbs").get<double>()),
                              format_number(st.at("spend").get<double>()),
                              format_number(st.at("confidence").get<double>()), st.at("metric").get<std::string>(),
                              st.at("calibration_scope").get<std::string>()});
    }
    if (!studies.rows.empty()) m.lift_studies = parse_lift_studies(studies);
    if (!j.at("reference_effect_shares").is_null()) {
      m.reference_effect_shares = j.at("reference_effect_shares").get<std::vector<double>>();
    }
    if (!j.at("pareto_front").is_null()) m.pareto_front = j.at("pareto_front").get<int>();
    if (!j.at("cluster").is_null()) m.cluster = j.at("cluster").get<int>();
  } catch (const json::exception& e) {
    throw InputError("reporting", std::string("corrupt model file: ") + e.what());
  }
  for (const auto& c : m.channels) {
    if (c.spend_history.size() != m.dates.size()) {
      throw InputError("reporting", "corrupt model file: spend history of '" + c.summary.name + "' has wrong length");
    }
  }
  return m;
}

std::string model_filename(std::string_view id) { return "RobynModel-" + std::string(id) + ".json"; }

std::filesystem::path save_model(const ExportedModel& model, const std::filesystem::path& dir) {
  const auto path = dir / model_filename(model.id);
  write_text_file(path, model_to_json(model));
  return path;
}

ExportedModel load_model(const std::filesystem::path& path) { return model_from_json(read_text_file(path)); }

ResponseModel response_model(const ExportedModel& model) {
  ResponseModel r;
  r.model_id = model.id;
  r.dep_var_type = model.roles.dep_var_type;
  r.dates = model.dates;
  for (const auto& c : model.channels) {
    if (!c.summary.paid) continue;
    const auto& s = c.summary;
    r.channels.push_back({s.name, ResponseCurve{s.coefficient, s.alpha, s.inflection, s.adstock_ratio}, c.spend_history});
  }
  return r;
}

ModelContext rebuild_context(const ExportedModel& model, const MmmDataset& ds, const HolidayTable& holidays) {
  ModelSpec spec;
  spec.adstock = model.space.family();
  spec.max_lag = model.max_lag;
  spec.split = model.split;
  spec.reference_shares = model.reference_effect_shares;
  DecompositionResult decomposition;
  if (!model.decomposition.components.empty()) decomposition = decompose(ds, holidays, model.decomposition);
  return ModelContext(ds, std::move(decomposition), spec, model.lift_studies);
}

ImportedModel import_model(const ExportedModel& model, const MmmDataset& ds, const HolidayTable& holidays,
                           bool override_fingerprint) {
  if (!override_fingerprint && dataset_fingerprint(ds) != model.dataset_fingerprint) {
    throw InputError("reporting", "dataset fingerprint " + dataset_fingerprint(ds) +
                                      " does not match the model's " + model.dataset_fingerprint);
  }
  const ModelContext ctx = rebuild_context(model, ds, holidays);
  ImportedModel out{model, fit_candidate(ctx, model.space, model.hyperparameters).summary};
  out.rescored.id = model.id;
  out.rescored.scores.scalar = model.scores.scalar;
  out.rescored.pareto_front = model.pareto_front;
  out.rescored.cluster = model.cluster;
  return out;
}

ImportedModel import_model(const std::filesystem::path& path, const MmmDataset& ds, const HolidayTable& holidays,
                           bool override_fingerprint) {
  return import_model(load_model(path), ds, holidays, override_fingerprint);
}

}  // namespace mmm
