#include "mmm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mmm/error.hpp"

namespace mmm {

namespace {

bool constant_over(std::span<const double> v, std::size_t rows) {
  if (rows == 0) return true;
  double lo = v[0];
  double hi = v[0];
  for (std::size_t t = 1; t < rows; ++t) {
    lo = std::min(lo, v[t]);
    hi = std::max(hi, v[t]);
  }
  return !(hi - lo > 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi))));
}

}  // namespace

ModelContext::ModelContext(MmmDataset dataset, DecompositionResult decomposition, ModelSpec spec,
                           std::vector<LiftStudy> studies)
    : dataset_(std::move(dataset)), decomposition_(std::move(decomposition)), spec_(std::move(spec)) {
  spec_.split.validate();
  const auto& roles = dataset_.roles();
  const std::size_t n = dataset_.window_size();
  const auto window_dates = dataset_.window_dates();

  channels_ = roles.paid_media_spends;
  paid_count_ = channels_.size();
  for (auto& c : dataset_.organic_columns()) channels_.push_back(std::move(c));

  if (spec_.max_lag) {
    if (*spec_.max_lag == 0) throw InputError("transforms", "max_lag must be at least 1");
    max_lag_ = *spec_.max_lag;
  } else {
    max_lag_ = dataset_.frequency() == Frequency::weekly ? n : std::size_t{60};
  }

  auto y = dataset_.window_column(roles.dep_var);
  response_.assign(y.begin(), y.end());
  const SplitRanges split = split_ranges(spec_.split, n);

  auto add_fixed = [&](const std::string& name, ColumnGroup group, std::span<const double> values) {
    if (constant_over(values, split.train_end)) {
      dropped_.push_back(name);
      return;
    }
    fixed_.push_back({name, group, Series(values.begin(), values.end())});
  };
  for (const auto& name : dataset_.context_columns()) {
    add_fixed(name, ColumnGroup::context, dataset_.window_column(name));
  }
  if (!decomposition_.component_names().empty()) {
    if (decomposition_.dates.size() != n ||
        !std::equal(window_dates.begin(), window_dates.end(), decomposition_.dates.begin())) {
      throw InputError("decomposition", "decomposition does not cover the modeling window");
    }
    for (const auto& name : decomposition_.component_names()) {
      add_fixed(name, ColumnGroup::decomposition, decomposition_.component(name));
    }
  }

  spend_totals_.resize(paid_count_);
  for (std::size_t i = 0; i < paid_count_; ++i) {
    auto s = dataset_.window_column(channels_[i]);
    spend_totals_[i] = std::accumulate(s.begin(), s.end(), 0.0);
  }
  const double total = std::accumulate(spend_totals_.begin(), spend_totals_.end(), 0.0);
  if (!(total > 0.0)) throw InputError("dataset", "total paid media spend in the window is zero");
  spend_shares_.resize(paid_count_);
  for (std::size_t i = 0; i < paid_count_; ++i) spend_shares_[i] = spend_totals_[i] / total;

  if (spec_.reference_shares) {
    const auto& r = *spec_.reference_shares;
    if (r.size() != paid_count_) {
      throw InputError("evaluation", "reference effect shares must cover every paid channel");
    }
    double sum = 0.0;
    for (double v : r) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("evaluation", "invalid reference share");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw InputError("evaluation", "reference shares must sum to 1");
  }

  for (auto& s : studies) {
    s.validate();
    for (auto& c : s.channels) {
      if (std::find(channels_.begin(), channels_.end(), c) != channels_.end()) continue;
      const auto& vars = roles.paid_media_vars;
      const auto it = std::find(vars.begin(), vars.end(), c);
      if (it == vars.end()) {
        throw InputError("evaluation", "lift study names unknown channel '" + c + "'");
      }
      c = roles.paid_media_spends[static_cast<std::size_t>(it - vars.begin())];
    }
    if (s.lift_end < window_dates.front() || s.lift_start > window_dates.back()) {
      throw InputError("evaluation", "lift study '" + s.channel_label() + "' (" + s.lift_start.iso() +
                                         ".." + s.lift_end.iso() + ") lies outside the modeling window");
    }
  }
  studies_ = std::move(studies);
}

const std::vector<double>& ModelContext::rssd_reference() const {
  return spec_.reference_shares ? *spec_.reference_shares : spend_shares_;
}

std::vector<double> CandidateModel::efficiency(DepVarType type) const {
  std::vector<double> out;
  for (const auto& c : channels) {
    if (c.paid) out.push_back(type == DepVarType::revenue ? c.roi : c.cpa);
  }
  return out;
}

const ChannelSummary& CandidateModel::channel(std::string_view name) const {
  for (const auto& c : channels) {
    if (c.name == name) return c;
  }
  throw InputError("reporting", "unknown channel '" + std::string(name) + "'");
}

FittedModel fit_candidate(const ModelContext& ctx, const HyperparameterSpace& space,
                          const HyperparameterVector& hp) {
  const auto& ds = ctx.dataset();
  const auto& channels = ctx.channels();
  if (space.channels() != channels) {
    throw InputError("search", "hyperparameter space channels do not match the dataset roles");
  }
  const std::size_t wb = ds.window_begin();
  const std::size_t we = ds.window_end();
  const std::size_t n = ds.window_size();

  FittedModel out;
  std::vector<DesignMatrix::Column> columns;
  columns.reserve(channels.size() + ctx.fixed_columns().size());
  for (std::size_t i = 0; i < channels.size(); ++i) {
    AdstockParams ap = space.adstock_params(hp, i);
    ap.max_lag = ctx.max_lag();
    const SaturationParams sp = space.saturation_params(hp, i);
    out.transforms.push_back(transform_channel(ds.column(channels[i]), wb, we, ap, sp));
    columns.push_back({channels[i], ctx.is_paid(i) ? ColumnGroup::paid_media : ColumnGroup::organic,
                       out.transforms.back().saturated});
  }
  for (const auto& c : ctx.fixed_columns()) columns.push_back(c);

  const DesignMatrix design(std::move(columns), ctx.response(), ctx.spec().split);
  const LambdaBounds lb = lambda_bounds(design);
  const double lambda = lb.degenerate ? 0.0 : lb.at(hp.get("lambda"));
  const RidgeFit fit = fit_ridge(design, lambda, default_lower_bounds(design));

  CandidateModel& m = out.summary;
  m.hyperparameters = hp;
  m.lambda = fit.lambda;
  m.intercept = fit.intercept;
  m.response_mean = design.response_mean();
  m.response_sd = design.response_sd();
  m.converged = fit.converged;
  m.metrics = score_fit(fit, design);
  for (std::size_t j = 0; j < design.cols(); ++j) {
    const auto& col = design.columns()[j];
    m.coefficients.push_back({col.name, col.group, fit.coef_std[j], fit.coef[j], design.mean(j), design.sd(j)});
  }

  const auto wd = ds.window_dates();
  out.dates.assign(wd.begin(), wd.end());
  out.actual = ctx.response();
  out.predicted = fit.predict(design);
  out.intercept = fit.intercept;
  out.split = design.split();
  for (std::size_t j = 0; j < design.cols(); ++j) {
    const auto& col = design.columns()[j];
    Series v(n);
    for (std::size_t t = 0; t < n; ++t) v[t] = fit.coef[j] * col.values[t];
    out.predictors.push_back({col.name, col.group, std::move(v)});
  }

  out.contributions.dates = out.dates;
  double paid_effect = 0.0;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const auto& tr = out.transforms[i];
    ChannelContribution cc{channels[i], out.predictors[i].values, Series(n)};
    for (std::size_t t = 0; t < n; ++t) cc.immediate[t] = fit.coef[i] * tr.immediate_saturated[t];

    ChannelSummary s;
    s.name = channels[i];
    s.paid = ctx.is_paid(i);
    const AdstockParams ap = space.adstock_params(hp, i);
    const SaturationParams sp = space.saturation_params(hp, i);
    s.theta = ap.theta;
    s.shape = space.family() == AdstockFamily::geometric ? 0.0 : ap.shape;
    s.scale = space.family() == AdstockFamily::geometric ? 0.0 : ap.scale;
    s.alpha = sp.alpha;
    s.gamma = sp.gamma;
    s.inflection = tr.inflection;
    s.adstock_ratio = tr.adstock_ratio;
    s.coefficient = fit.coef[i];
    auto spend = ds.window_column(channels[i]);
    s.total_spend = std::accumulate(spend.begin(), spend.end(), 0.0);
    s.mean_spend = s.total_spend / static_cast<double>(n);
    s.total_contribution = std::accumulate(cc.total.begin(), cc.total.end(), 0.0);
    s.immediate_contribution = std::accumulate(cc.immediate.begin(), cc.immediate.end(), 0.0);
    s.roi = s.total_spend > 0.0 ? s.total_contribution / s.total_spend : 0.0;
    s.cpa = s.total_contribution > 0.0 ? s.total_spend / s.total_contribution
                                       : std::numeric_limits<double>::infinity();
    if (s.paid) paid_effect += std::abs(s.total_contribution);
    m.channels.push_back(std::move(s));
    out.contributions.channels.push_back(std::move(cc));
  }

  std::vector<double> effect(ctx.paid_count());
  for (std::size_t i = 0; i < ctx.paid_count(); ++i) {
    auto& s = m.channels[i];
    s.spend_share = ctx.spend_shares()[i];
    s.effect_share = paid_effect > 0.0 ? std::abs(s.total_contribution) / paid_effect : 0.0;
    effect[i] = s.effect_share;
  }
  m.scores.nrmse = m.metrics.selection_nrmse();
  // With every paid coefficient at zero there are no effect shares to compare;
  // the distance is then taken to the all-zero vector.
  m.scores.decomp_rssd = decomp_rssd(effect, ctx.rssd_reference());
  if (ctx.has_studies()) m.scores.mape_lift = mape_lift(out.contributions, ctx.studies());

  if (!std::isfinite(m.scores.nrmse) || !std::isfinite(m.scores.decomp_rssd) ||
      (m.scores.mape_lift && !std::isfinite(*m.scores.mape_lift))) {
    throw NumericError("search: non-finite objective");
  }
  return out;
}

CandidateModel evaluate_candidate(const ModelContext& ctx, const HyperparameterSpace& space,
                                  const HyperparameterVector& hp) {
  try {
    return fit_candidate(ctx, space, hp).summary;
  } catch (const std::exception& e) {
    CandidateModel m;
    m.hyperparameters = hp;
    m.ok = false;
    m.error = e.what();
    constexpr double inf = std::numeric_limits<double>::infinity();
    m.scores.nrmse = inf;
    m.scores.decomp_rssd = inf;
    if (ctx.has_studies()) m.scores.mape_lift = inf;
    m.scores.scalar = inf;
    return m;
  }
}

}  // namespace mmm
