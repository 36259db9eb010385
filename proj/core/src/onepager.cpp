#include "mmm/onepager.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "mmm/error.hpp"

namespace mmm {

namespace {

std::string fixed4(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string OnePager::header() const {
  auto splits = [&](auto field) {
    std::string s = "train = " + fixed4(field(metrics.train));
    s += " | val = " + (metrics.val ? fixed4(field(*metrics.val)) : std::string("NA"));
    s += " | test = " + (metrics.test ? fixed4(field(*metrics.test)) : std::string("NA"));
    return s;
  };
  return "NRMSE: " + splits([](const SplitMetrics& m) { return m.nrmse; }) + "; [Adj. R2: " +
         splits([](const SplitMetrics& m) { return m.adj_r2; }) + "]; DECOMP.RSSD = " + fixed4(scores.decomp_rssd) +
         "; MAPE = " + (scores.mape_lift ? fixed4(*scores.mape_lift) : std::string("NA"));
}

BootstrapItem bootstrap_mean(std::span<const double> values, std::uint64_t seed, int resamples) {
  BootstrapItem out;
  std::vector<double> v;
  for (double x : values) {
    if (std::isfinite(x)) v.push_back(x);
  }
  out.cluster_size = v.size();
  if (v.empty()) {
    out.mean = out.lower = out.upper = std::numeric_limits<double>::quiet_NaN();
    out.min_max = true;
    return out;
  }
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 5) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    out.lower = *lo;
    out.upper = *hi;
    out.min_max = true;
    return out;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[pick(rng)];
    m = s / static_cast<double>(v.size());
  }
  std::sort(means.begin(), means.end());
  auto pct = [&](double q) {
    const double pos = q * static_cast<double>(means.size() - 1);
    const auto a = static_cast<std::size_t>(std::floor(pos));
    const std::size_t b = std::min(a + 1, means.size() - 1);
    return means[a] + (pos - static_cast<double>(a)) * (means[b] - means[a]);
  };
  out.lower = std::min(pct(0.025), out.mean);
  out.upper = std::max(pct(0.975), out.mean);
  return out;
}

CurveItem response_curve_points(const ChannelSummary& c, int points, double factor) {
  CurveItem out;
  out.channel = c.name;
  const ResponseCurve curve{c.coefficient, c.alpha, c.inflection, c.adstock_ratio};
  const double top = factor * c.mean_spend;
  for (int i = 0; i < points; ++i) {
    const double m = points > 1 ? top * static_cast<double>(i) / static_cast<double>(points - 1) : 0.0;
    out.spend.push_back(m);
    out.response.push_back(curve.value(m));
  }
  out.mean_spend = c.mean_spend;
  out.mean_response = curve.value(c.mean_spend);
  return out;
}

OnePager build_onepager(const FittedModel& fit, const ModelContext& ctx,
                        std::span<const CandidateModel> cluster_members, std::uint64_t seed) {
  const CandidateModel& m = fit.summary;
  OnePager p;
  p.model_id = m.id;
  p.dep_var_type = ctx.dataset().roles().dep_var_type;
  p.family = ctx.spec().adstock;
  p.metrics = m.metrics;
  p.scores = m.scores;
  p.cluster = m.cluster;

  const double n = static_cast<double>(fit.dates.size());
  const double predicted_total = std::accumulate(fit.predicted.begin(), fit.predicted.end(), 0.0);
  auto share = [&](double v) { return predicted_total != 0.0 ? v / predicted_total : 0.0; };
  p.waterfall.push_back({"(Intercept)", "intercept", fit.intercept * n, share(fit.intercept * n)});
  for (const auto& pc : fit.predictors) {
    const double total = std::accumulate(pc.values.begin(), pc.values.end(), 0.0);
    p.waterfall.push_back({pc.name, to_string(pc.group), total, share(total)});
  }
  std::stable_sort(p.waterfall.begin(), p.waterfall.end(),
                   [](const WaterfallItem& a, const WaterfallItem& b) { return a.total > b.total; });

  const bool revenue = p.dep_var_type == DepVarType::revenue;
  double spend_sum = 0.0;
  double effect_sum = 0.0;
  for (const auto& c : m.channels) {
    if (!c.paid) continue;
    p.shares.push_back({c.name, c.spend_share, c.effect_share, revenue ? c.roi : c.cpa});
    spend_sum += c.total_spend;
    effect_sum += c.total_contribution;
  }
  p.total_efficiency = revenue ? (spend_sum > 0.0 ? effect_sum / spend_sum : 0.0)
                               : (effect_sum > 0.0 ? spend_sum / effect_sum : std::numeric_limits<double>::infinity());

  if (!cluster_members.empty()) {
    std::vector<BootstrapItem> items;
    std::size_t k = 0;
    for (std::size_t i = 0; i < m.channels.size(); ++i) {
      if (!m.channels[i].paid) continue;
      std::vector<double> values;
      for (const auto& member : cluster_members) values.push_back(member.efficiency(p.dep_var_type)[k]);
      BootstrapItem b = bootstrap_mean(values, seed + i);
      b.channel = m.channels[i].name;
      items.push_back(std::move(b));
      ++k;
    }
    p.bootstrap = std::move(items);
  }

  for (std::size_t i = 0; i < m.channels.size(); ++i) {
    const auto& c = m.channels[i];
    p.decay.push_back({c.name, c.theta, c.shape, c.scale, fit.transforms[i].lag_weights});
    ImmediateItem im{c.name, 100.0, 0.0};
    if (c.total_contribution > 0.0) {
      im.immediate_pct = 100.0 * std::clamp(c.immediate_contribution / c.total_contribution, 0.0, 1.0);
      im.carryover_pct = 100.0 - im.immediate_pct;
    }
    p.immediate.push_back(im);
    if (c.paid) p.curves.push_back(response_curve_points(c));
  }

  p.dates = fit.dates;
  p.actual = fit.actual;
  p.predicted = fit.predicted;
  p.split = fit.split;
  p.residual.resize(p.actual.size());
  for (std::size_t t = 0; t < p.actual.size(); ++t) p.residual[t] = p.actual[t] - p.predicted[t];
  return p;
}

std::string OnePager::to_json() const {
  using nlohmann::json;
  auto split_json = [](const std::optional<SplitMetrics>& s) {
    if (!s) return json(nullptr);
    return json{{"n", s->n}, {"nrmse", num(s->nrmse)}, {"r2", num(s->r2)}, {"adj_r2", num(s->adj_r2)}};
  };
  json j;
  j["model_id"] = model_id;
  j["header"] = header();
  j["dep_var_type"] = to_string(dep_var_type);
  j["adstock"] = to_string(family);
  j["cluster"] = cluster ? json(*cluster) : json(nullptr);
  j["metrics"] = {{"train", split_json(metrics.train)}, {"val", split_json(metrics.val)}, {"test", split_json(metrics.test)}};
  j["scores"] = {{"nrmse", num(scores.nrmse)},
                 {"decomp_rssd", num(scores.decomp_rssd)},
                 {"mape_lift", scores.mape_lift ? num(*scores.mape_lift) : json(nullptr)},
                 {"scalar", num(scores.scalar)}};
  for (const auto& w : waterfall) {
    j["waterfall"].push_back({{"name", w.name}, {"group", w.group}, {"total", num(w.total)}, {"share", num(w.share)}});
  }
  const std::string eff = efficiency_label() == "ROI" ? "roi" : "cpa";
  for (const auto& s : shares) {
    j["share_of_spend_vs_effect"].push_back({{"channel", s.channel},
                                             {"spend_share", num(s.spend_share)},
                                             {"effect_share", num(s.effect_share)},
                                             {eff, num(s.efficiency)}});
  }
  j["total_" + eff] = num(total_efficiency);
  if (bootstrap) {
    j["bootstrap"] = json::array();
    for (const auto& b : *bootstrap) {
      j["bootstrap"].push_back({{"channel", b.channel},
                                {"mean", num(b.mean)},
                                {"lower", num(b.lower)},
                                {"upper", num(b.upper)},
                                {"cluster_size", b.cluster_size},
                                {"min_max", b.min_max}});
    }
  } else {
    j["bootstrap"] = nullptr;
  }
  for (const auto& d : decay) {
    j["adstock_decay"].push_back({{"channel", d.channel},
                                  {"theta", num(d.theta)},
                                  {"shape", num(d.shape)},
                                  {"scale", num(d.scale)},
                                  {"lag_weights", d.lag_weights}});
  }
  for (const auto& i : immediate) {
    j["immediate_vs_carryover"].push_back(
        {{"channel", i.channel}, {"immediate_pct", num(i.immediate_pct)}, {"carryover_pct", num(i.carryover_pct)}});
  }
  for (const auto& c : curves) {
    j["response_curves"].push_back({{"channel", c.channel},
                                    {"spend", c.spend},
                                    {"response", c.response},
                                    {"mean_spend", num(c.mean_spend)},
                                    {"mean_response", num(c.mean_response)}});
  }
  json dates_json = json::array();
  for (const auto& d : dates) dates_json.push_back(d.iso());
  j["actual_vs_predicted"] = {{"dates", dates_json},
                              {"actual", actual},
                              {"predicted", predicted},
                              {"train_end", split.train_end},
                              {"val_end", split.val_end}};
  j["fitted_vs_residual"] = {{"fitted", predicted}, {"residual", residual}};
  return j.dump(2) + "\n";
}

}  // namespace mmm
