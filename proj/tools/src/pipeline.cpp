#include "mmm/cli/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <thread>

#include "mmm/csv.hpp"
#include "mmm/error.hpp"
#include "mmm/onepager.hpp"
#include "mmm/plots.hpp"
#include "mmm/simulator.hpp"

namespace mmm::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& message) { throw InputError("cli", message); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_inf(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json read_json(const fs::path& path) {
  if (!fs::exists(path)) fail("missing " + path.string());
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    fail("cannot parse " + path.string() + ": " + e.what());
  }
}

}  // namespace

std::vector<Date> refresh_span(const ExportedModel& model, std::size_t steps) {
  return {model.window.start, model.window.end + static_cast<int>(steps) * period_days(model.frequency)};
}

HolidayTable resolve_holidays(const std::optional<fs::path>& path, const std::string& country,
                              const std::vector<Date>& dates) {
  if (path) return load_holidays(*path);
  if (country.empty() || dates.empty()) return {};
  if (country != "DE" && country != "US") {
    fail("no built-in holidays for country '" + country + "'; set dt_holidays");
  }
  return generate_holidays(country, dates.front().year() - 1, dates.back().year() + 1);
}

Inputs load_inputs(const RunConfig& cfg) {
  Inputs in;
  in.dataset = load_dataset(cfg.dt_input, cfg.roles, cfg.window);
  const bool holidays = cfg.decomposition.has(ProphetComponent::holiday);
  in.holidays = holidays ? resolve_holidays(cfg.dt_holidays, cfg.roles.prophet_country, in.dataset.dates())
                         : (cfg.dt_holidays ? load_holidays(*cfg.dt_holidays) : HolidayTable{});
  if (cfg.calibration_input) in.studies = load_lift_studies(*cfg.calibration_input);
  return in;
}

ModelContext build_context(const RunConfig& cfg, const Inputs& inputs) {
  DecompositionResult dec;
  if (!cfg.decomposition.components.empty()) dec = decompose(inputs.dataset, inputs.holidays, cfg.decomposition);
  ModelSpec spec;
  spec.adstock = cfg.adstock;
  spec.split = cfg.split;
  return ModelContext(inputs.dataset, std::move(dec), spec, inputs.studies);
}

HyperparameterSpace build_space(const RunConfig& cfg, const ModelContext& ctx) {
  HyperparameterSpace space = ctx.default_space();
  for (const auto& [name, b] : cfg.hyperparameters) space.set_bounds(name, b);
  return space;
}

std::string archive_to_json(const SearchResult& result) {
  json cands = json::array();
  for (const auto& m : result.archive) {
    json c;
    c["id"] = m.id;
    c["trial"] = m.trial;
    c["iteration"] = m.iteration;
    c["index"] = m.index;
    c["ok"] = m.ok;
    if (!m.ok) c["error"] = m.error;
    c["hyperparameters"] = m.hyperparameters.values;
    c["nrmse"] = number_or_null(m.scores.nrmse);
    c["decomp_rssd"] = number_or_null(m.scores.decomp_rssd);
    c["mape_lift"] = m.scores.mape_lift ? number_or_null(*m.scores.mape_lift) : json(nullptr);
    c["scalar"] = number_or_null(m.scores.scalar);
    c["pareto_front"] = m.pareto_front ? json(*m.pareto_front) : json(nullptr);
    c["cluster"] = m.cluster ? json(*m.cluster) : json(nullptr);
    cands.push_back(std::move(c));
  }
  json j;
  j["hyperparameter_names"] = result.space.names();
  j["calibrated"] = result.calibrated;
  j["candidates"] = std::move(cands);
  return j.dump();
}

std::vector<CandidateModel> archive_from_json(std::string_view text, const HyperparameterSpace& space) {
  std::vector<CandidateModel> out;
  try {
    const json j = json::parse(text);
    if (j.at("hyperparameter_names").get<std::vector<std::string>>() != space.names()) {
      fail("archive hyperparameters do not match the run configuration");
    }
    const bool calibrated = j.at("calibrated").get<bool>();
    for (const auto& c : j.at("candidates")) {
      CandidateModel m;
      m.id = c.at("id").get<std::string>();
      m.trial = c.at("trial").get<int>();
      m.iteration = c.at("iteration").get<int>();
      m.index = c.at("index").get<int>();
      m.ok = c.at("ok").get<bool>();
      m.error = c.value("error", std::string());
      m.hyperparameters = {space.names(), c.at("hyperparameters").get<std::vector<double>>()};
      m.scores.nrmse = number_or_inf(c.at("nrmse"));
      m.scores.decomp_rssd = number_or_inf(c.at("decomp_rssd"));
      if (calibrated || !c.at("mape_lift").is_null()) m.scores.mape_lift = number_or_inf(c.at("mape_lift"));
      m.scores.scalar = number_or_inf(c.at("scalar"));
      if (!c.at("pareto_front").is_null()) m.pareto_front = c["pareto_front"].get<int>();
      if (!c.at("cluster").is_null()) m.cluster = c["cluster"].get<int>();
      out.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    fail(std::string("corrupt archive: ") + e.what());
  }
  return out;
}

void write_run_outputs(const fs::path& dir, const ModelContext& ctx, const RunOutput& run, const std::string& csv_out,
                       bool plot_pareto, std::size_t workers) {
  fs::create_directories(dir);
  const auto& result = run.search;
  write_text_file(dir / "archive.json", archive_to_json(result));

  const auto type = ctx.dataset().roles().dep_var_type;
  const auto members = run.pareto.members();
  if (!csv_out.empty()) write_csv(dir / "pareto.csv", candidates_table(result, members, type));
  if (csv_out == "all") {
    std::vector<std::size_t> all(result.archive.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    write_csv(dir / "all.csv", candidates_table(result, all, type));
  }
  if (!plot_pareto) return;

  std::map<int, std::vector<CandidateModel>> clusters;
  for (std::size_t i : members) {
    const auto& m = result.archive[i];
    if (m.cluster) clusters[*m.cluster].push_back(m);
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto work = [&] {
    for (std::size_t k = next++; k < members.size(); k = next++) {
      try {
        const auto& m = result.archive[members[k]];
        const FittedModel fit = fit_candidate(ctx, result.space, m.hyperparameters);
        const std::vector<CandidateModel> none;
        const auto& peers = m.cluster ? clusters.at(*m.cluster) : none;
        OnePager page = build_onepager(fit, ctx, peers, result.config.seed);
        page.scores = m.scores;
        page.cluster = m.cluster;
        render_plots(page, dir / "onepagers" / m.id);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < std::max<std::size_t>(workers, 1); ++w) pool.emplace_back(work);
    work();
  }
  if (error) std::rethrow_exception(error);
}

RunState load_run_state(const fs::path& run_dir) {
  const json manifest = read_json(run_dir / "manifest.json");
  RunState st;
  st.dir = run_dir;
  const std::string kind = manifest.value("kind", std::string());
  if (kind == "run") {
    const RunConfig cfg = parse_run_config(manifest.at("config").dump(), run_dir);
    const Inputs in = load_inputs(cfg);
    st.context.emplace(build_context(cfg, in));
    st.space = build_space(cfg, *st.context);
    st.search = cfg.search;
  } else if (kind == "refresh") {
    const auto& r = manifest.at("refresh");
    const ExportedModel base = load_model(run_dir / "base_model.json");
    RefreshConfig rc;
    rc.steps = r.at("steps").get<std::size_t>();
    rc.iterations = r.at("iterations").get<int>();
    rc.trials = r.at("trials").get<int>();
    rc.seed = r.at("seed").get<std::uint64_t>();
    rc.workers = r.at("workers").get<std::size_t>();
    const fs::path data = r.at("data").get<std::string>();
    std::optional<fs::path> holidays;
    if (!r.at("holidays").is_null()) holidays = fs::path(r["holidays"].get<std::string>());
    const CsvTable table = read_csv(data);
    const HolidayTable hol = base.decomposition.has(ProphetComponent::holiday)
                                 ? resolve_holidays(holidays, base.decomposition.country, refresh_span(base, rc.steps))
                                 : HolidayTable{};
    RefreshSetup setup = prepare_refresh(base, table, hol, rc);
    st.space = setup.space;
    st.search = setup.search;
    st.context.emplace(std::move(setup.context));
  } else {
    fail("manifest in " + run_dir.string() + " has unknown kind '" + kind + "'");
  }
  return st;
}

fs::path select_model(const fs::path& run_dir, const std::string& id) {
  RunState st = load_run_state(run_dir);
  SearchResult result;
  result.space = st.space;
  result.config = st.search;
  const auto archive = archive_from_json(read_text_file(run_dir / "archive.json"), st.space);
  for (const auto& m : archive) {
    if (m.id == id) result.archive.push_back(m);
  }
  if (result.archive.empty()) fail("unknown model id '" + id + "' in " + run_dir.string());
  const ExportedModel model = export_candidate(*st.context, result, id);
  const fs::path path = save_model(model, run_dir / "models");
  json sel;
  sel["model_id"] = id;
  sel["file"] = fs::relative(path, run_dir).generic_string();
  write_text_file(run_dir / "selected.json", sel.dump(2) + "\n");
  return path;
}

fs::path selected_model_path(const fs::path& run_dir) {
  const fs::path marker = run_dir / "selected.json";
  if (!fs::exists(marker)) fail("no selected model in " + run_dir.string() + "; run `mmm select` first");
  const json j = read_json(marker);
  return run_dir / j.at("file").get<std::string>();
}

}  // namespace mmm::cli
