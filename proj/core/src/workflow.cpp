#include "mmm/workflow.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include "mmm/error.hpp"

namespace mmm {

RunOutput run_models(const ModelContext& ctx, const HyperparameterSpace& space, const SearchConfig& cfg,
                     std::ostream* progress) {
  RunOutput out;
  out.search = run_search(ctx, space, cfg, progress);
  out.pareto = pareto_fronts(out.search.archive, pareto_config(out.search));
  assign_fronts(out.search.archive, out.pareto);
  out.best = select_best(out.search.archive, out.pareto);
  if (cfg.clusters) {
    const auto members = out.pareto.members();
    if (members.size() >= 2) {
      out.clusters = cluster_candidates(out.search.archive, members, ctx.dataset().roles().dep_var_type, cfg.seed);
    }
  }
  if (progress) {
    *progress << "pareto: " << out.pareto.fronts.size() << " fronts, " << out.pareto.size()
              << " candidates; selected " << out.best_candidate().id << '\n';
  }
  return out;
}

CsvTable candidates_table(const SearchResult& result, std::span<const std::size_t> rows, DepVarType type) {
  const auto& archive = result.archive;
  std::vector<std::size_t> order(rows.begin(), rows.end());
  const auto front = [&](std::size_t i) { return archive[i].pareto_front.value_or(std::numeric_limits<int>::max()); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (front(a) != front(b)) return front(a) < front(b);
    if (archive[a].scores.scalar != archive[b].scores.scalar) return archive[a].scores.scalar < archive[b].scores.scalar;
    return a < b;
  });

  CsvTable t;
  t.header = {"solID", "trial", "iteration", "ok", "nrmse", "nrmse_train", "nrmse_val", "nrmse_test",
              "rsq_train", "rsq_val", "rsq_test", "decomp.rssd", "mape", "scalar", "lambda",
              "robynPareto", "cluster"};
  for (const auto& n : result.space.names()) t.header.push_back(n);
  const std::string eff = type == DepVarType::revenue ? "_roi" : "_cpa";
  std::vector<std::string> paid;
  for (const auto& m : archive) {
    if (!m.ok) continue;
    for (const auto& c : m.channels) {
      if (c.paid) paid.push_back(c.name);
    }
    break;
  }
  for (const auto& n : paid) t.header.push_back(n + eff);

  auto num = [](double v) { return format_number(v); };
  auto opt = [&](const std::optional<SplitMetrics>& s, bool r2) -> std::string {
    if (!s) return "";
    return num(r2 ? s->adj_r2 : s->nrmse);
  };
  for (std::size_t i : order) {
    const auto& m = archive[i];
    std::vector<std::string> row{m.id,
                                 std::to_string(m.trial),
                                 std::to_string(m.iteration),
                                 m.ok ? "true" : "false",
                                 num(m.scores.nrmse),
                                 m.ok ? num(m.metrics.train.nrmse) : "",
                                 m.ok ? opt(m.metrics.val, false) : "",
                                 m.ok ? opt(m.metrics.test, false) : "",
                                 m.ok ? num(m.metrics.train.adj_r2) : "",
                                 m.ok ? opt(m.metrics.val, true) : "",
                                 m.ok ? opt(m.metrics.test, true) : "",
                                 num(m.scores.decomp_rssd),
                                 m.scores.mape_lift ? num(*m.scores.mape_lift) : "",
                                 num(m.scores.scalar),
                                 num(m.lambda),
                                 m.pareto_front ? std::to_string(*m.pareto_front) : "",
                                 m.cluster ? std::to_string(*m.cluster) : ""};
    for (double v : m.hyperparameters.values) row.push_back(num(v));
    const auto e = m.ok ? m.efficiency(type) : std::vector<double>{};
    for (std::size_t c = 0; c < paid.size(); ++c) row.push_back(c < e.size() ? num(e[c]) : "");
    t.rows.push_back(std::move(row));
  }
  return t;
}

RefreshSetup prepare_refresh(const ExportedModel& model, const CsvTable& new_data, const HolidayTable& holidays,
                             const RefreshConfig& cfg) {
  if (cfg.steps == 0) throw InputError("search", "refresh_steps must be at least 1");
  const int shift = static_cast<int>(cfg.steps) * period_days(model.frequency);
  const DateWindow window{model.window.start + shift, model.window.end + shift};

  MmmDataset ds;
  try {
    LoadOptions opts;
    opts.frequency = model.frequency;
    ds = build_dataset(new_data, model.roles, std::nullopt, opts);
  } catch (const InputError& e) {
    throw InputError("search", std::string("refresh data does not match the model schema: ") + e.what());
  }
  if (ds.dates().back() < window.end) {
    throw InputError("search", "refresh needs data through " + window.end.iso() + " (" +
                                   std::to_string(cfg.steps) + " periods past the model window); data ends " +
                                   ds.dates().back().iso());
  }
  LoadOptions opts;
  opts.frequency = model.frequency;
  ds = build_dataset(new_data, model.roles, window, opts);

  std::vector<LiftStudy> studies;
  for (const auto& s : model.lift_studies) {
    if (!(s.lift_end < window.start) && !(window.end < s.lift_start)) studies.push_back(s);
  }
  ModelSpec spec;
  spec.adstock = model.space.family();
  spec.max_lag = model.max_lag;
  spec.split = model.split;
  spec.reference_shares = model.effect_shares();
  DecompositionResult decomposition;
  if (!model.decomposition.components.empty()) decomposition = decompose(ds, holidays, model.decomposition);

  SearchConfig sc = model.search;
  sc.iterations = cfg.iterations;
  sc.trials = cfg.trials;
  if (cfg.seed) sc.seed = *cfg.seed;
  sc.workers = cfg.workers;
  if (studies.empty()) sc.weights.mape_lift = 0.0;
  if (sc.weights.nrmse + sc.weights.decomp_rssd + sc.weights.mape_lift <= 0.0) sc.weights.nrmse = 1.0;
  return {window, model.space.narrowed(model.hyperparameters, cfg.narrowing), *spec.reference_shares,
          ModelContext(std::move(ds), std::move(decomposition), spec, std::move(studies)), sc};
}

RefreshOutput refresh_model(const ExportedModel& model, const CsvTable& new_data, const HolidayTable& holidays,
                            const RefreshConfig& cfg, std::ostream* progress) {
  RefreshOutput out{prepare_refresh(model, new_data, holidays, cfg), {}};
  out.run = run_models(out.setup.context, out.setup.space, out.setup.search, progress);
  return out;
}

}  // namespace mmm
