#include "mmm/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmm/error.hpp"

namespace mmm {

std::string to_string(ColumnGroup g) {
  switch (g) {
    case ColumnGroup::paid_media:
      return "paid_media";
    case ColumnGroup::organic:
      return "organic";
    case ColumnGroup::context:
      return "context";
    case ColumnGroup::decomposition:
      return "decomposition";
  }
  return "?";
}

ColumnGroup parse_column_group(std::string_view text) {
  if (text == "paid_media") return ColumnGroup::paid_media;
  if (text == "organic") return ColumnGroup::organic;
  if (text == "context") return ColumnGroup::context;
  if (text == "decomposition") return ColumnGroup::decomposition;
  throw InputError("regression", "unknown column group '" + std::string(text) + "'");
}

void SplitPlan::validate() const {
  if (!(train_fraction >= 0.5 && train_fraction <= 0.9)) {
    throw InputError("regression", "train_fraction must be in [0.5, 0.9]");
  }
}

SplitRanges split_ranges(const SplitPlan& plan, std::size_t n) {
  plan.validate();
  SplitRanges r;
  if (!plan.ts_validation) {
    r.train_end = r.val_end = r.test_end = n;
    if (n < 2) throw InputError("regression", "need at least two training rows");
    return r;
  }
  const auto train = static_cast<std::size_t>(std::floor(plan.train_fraction * static_cast<double>(n)));
  const std::size_t rest = n - std::min(train, n);
  const std::size_t val = rest / 2;
  const std::size_t test = rest - val;
  if (train < 2 || val < 1 || test < 1) {
    throw InputError("regression", "window of " + std::to_string(n) +
                                       " rows is too short for a 3-way split");
  }
  r.train_end = train;
  r.val_end = train + val;
  r.test_end = n;
  return r;
}

DesignMatrix::DesignMatrix(std::vector<Column> columns, Series response, const SplitPlan& split)
    : columns_(std::move(columns)), response_(std::move(response)) {
  const std::size_t n = response_.size();
  split_ = split_ranges(split, n);
  const std::size_t nt = split_.train_end;
  auto moments = [nt](const Series& v, double& mean, double& sd) {
    mean = 0.0;
    for (std::size_t t = 0; t < nt; ++t) mean += v[t];
    mean /= static_cast<double>(nt);
    double var = 0.0;
    for (std::size_t t = 0; t < nt; ++t) var += (v[t] - mean) * (v[t] - mean);
    sd = std::sqrt(var / static_cast<double>(nt));
  };
  means_.resize(columns_.size());
  sds_.resize(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].values.size() != n) {
      throw InputError("regression", "column '" + columns_[j].name + "' length mismatch");
    }
    moments(columns_[j].values, means_[j], sds_[j]);
    if (!(sds_[j] > 1e-12 * std::max(1.0, std::abs(means_[j])))) {
      throw InputError("regression",
                       "column '" + columns_[j].name + "' is constant over the training rows");
    }
  }
  moments(response_, y_mean_, y_sd_);
  if (!(y_sd_ > 0.0)) y_sd_ = 1.0;
}

void DesignMatrix::training_moments(std::vector<double>& gram, std::vector<double>& zty) const {
  const std::size_t p = cols();
  const std::size_t nt = train_rows();
  std::vector<double> z(p * nt);
  for (std::size_t j = 0; j < p; ++j) {
    const auto& v = columns_[j].values;
    for (std::size_t t = 0; t < nt; ++t) z[j * nt + t] = (v[t] - means_[j]) / sds_[j];
  }
  gram.assign(p * p, 0.0);
  zty.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    const double* zj = &z[j * nt];
    for (std::size_t k = j; k < p; ++k) {
      const double* zk = &z[k * nt];
      double acc = 0.0;
      for (std::size_t t = 0; t < nt; ++t) acc += zj[t] * zk[t];
      gram[j * p + k] = gram[k * p + j] = acc;
    }
    double acc = 0.0;
    for (std::size_t t = 0; t < nt; ++t) acc += zj[t] * (response_[t] - y_mean_) / y_sd_;
    zty[j] = acc;
  }
}

LambdaBounds lambda_bounds(const DesignMatrix& design) {
  if (design.cols() == 0) throw InputError("regression", "empty design");
  std::vector<double> gram, zty;
  design.training_moments(gram, zty);
  double top = 0.0;
  for (double v : zty) top = std::max(top, std::abs(v));
  LambdaBounds b;
  b.max = top / (static_cast<double>(design.train_rows()) * 0.001);
  b.min = 1e-4 * b.max;
  b.degenerate = !(b.max > 0.0);
  return b;
}

CoordinateDescentResult solve_ridge_cd(std::span<const double> gram, std::span<const double> zty,
                                       double lambda, std::span<const double> lower, double tol,
                                       int max_sweeps) {
  const std::size_t p = zty.size();
  if (gram.size() != p * p || lower.size() != p) {
    throw InputError("regression", "coordinate descent dimension mismatch");
  }
  if (!(lambda >= 0.0)) throw InputError("regression", "lambda must be >= 0");
  CoordinateDescentResult res;
  res.beta.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) res.beta[j] = std::max(0.0, lower[j]);
  // grad_j = c_j - (G b)_j
  std::vector<double> grad(zty.begin(), zty.end());
  for (std::size_t j = 0; j < p; ++j) {
    if (res.beta[j] == 0.0) continue;
    for (std::size_t k = 0; k < p; ++k) grad[k] -= gram[k * p + j] * res.beta[j];
  }
  for (res.sweeps = 1; res.sweeps <= max_sweeps; ++res.sweeps) {
    double max_change = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double gjj = gram[j * p + j];
      const double denom = gjj + lambda;
      if (!(denom > 0.0)) continue;
      const double old = res.beta[j];
      const double next = std::max(lower[j], (grad[j] + gjj * old) / denom);
      const double delta = next - old;
      if (delta == 0.0) continue;
      res.beta[j] = next;
      for (std::size_t k = 0; k < p; ++k) grad[k] -= gram[k * p + j] * delta;
      max_change = std::max(max_change, std::abs(delta));
    }
    if (max_change > tol) continue;
    // Projected half-gradient (G b + lambda b - c), zero where a bound holds it.
    double residual = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double h = lambda * res.beta[j] - grad[j];
      residual = std::max(residual, res.beta[j] > lower[j] ? std::abs(h) : std::max(0.0, -h));
    }
    if (residual < tol) {
      res.converged = true;
      return res;
    }
  }
  res.sweeps = max_sweeps;
  return res;
}

std::vector<double> default_lower_bounds(const DesignMatrix& design) {
  std::vector<double> lower(design.cols(), -std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < design.cols(); ++j) {
    const auto g = design.columns()[j].group;
    if (g == ColumnGroup::paid_media || g == ColumnGroup::organic) lower[j] = 0.0;
  }
  return lower;
}

RidgeFit fit_ridge(const DesignMatrix& design, double lambda, std::span<const double> lower) {
  std::vector<double> gram, zty;
  design.training_moments(gram, zty);
  const auto cd = solve_ridge_cd(gram, zty, lambda, lower);
  RidgeFit fit;
  fit.lambda = lambda;
  fit.coef_std = cd.beta;
  fit.converged = cd.converged;
  fit.sweeps = cd.sweeps;
  fit.coef.resize(design.cols());
  fit.intercept = design.response_mean();
  for (std::size_t j = 0; j < design.cols(); ++j) {
    fit.coef[j] = cd.beta[j] * design.response_sd() / design.sd(j);
    fit.intercept -= fit.coef[j] * design.mean(j);
  }
  return fit;
}

Series RidgeFit::predict(const DesignMatrix& design) const {
  Series out(design.rows(), intercept);
  for (std::size_t j = 0; j < design.cols(); ++j) {
    const auto& v = design.columns()[j].values;
    for (std::size_t t = 0; t < out.size(); ++t) out[t] += coef[j] * v[t];
  }
  return out;
}

Series RidgeFit::predict_standardized(const DesignMatrix& design) const {
  Series out(design.rows(), 0.0);
  for (std::size_t t = 0; t < out.size(); ++t) {
    double acc = 0.0;
    for (std::size_t j = 0; j < design.cols(); ++j) acc += coef_std[j] * design.z(j, t);
    out[t] = design.response_mean() + design.response_sd() * acc;
  }
  return out;
}

double nrmse(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size() || actual.empty()) {
    throw InputError("regression", "nrmse needs equal nonempty series");
  }
  const auto [lo, hi] = std::minmax_element(actual.begin(), actual.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) throw InputError("regression", "NRMSE undefined for constant actuals");
  double sse = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i];
    sse += e * e;
  }
  return std::sqrt(sse / static_cast<double>(actual.size())) / range;
}

SplitMetrics split_metrics(std::span<const double> actual, std::span<const double> predicted,
                           std::size_t predictors) {
  SplitMetrics m;
  m.n = actual.size();
  m.nrmse = nrmse(actual, predicted);
  double mean = 0.0;
  for (double v : actual) mean += v;
  mean /= static_cast<double>(actual.size());
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    sse += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    sst += (actual[i] - mean) * (actual[i] - mean);
  }
  m.r2 = 1.0 - sse / sst;
  const double n = static_cast<double>(m.n);
  const double dof = n - static_cast<double>(predictors) - 1.0;
  // Too few rows for the adjustment; report plain R2.
  m.adj_r2 = dof > 0.0 ? 1.0 - (1.0 - m.r2) * (n - 1.0) / dof : m.r2;
  return m;
}

FitMetrics score_fit(const RidgeFit& fit, const DesignMatrix& design) {
  const Series pred = fit.predict(design);
  const auto& y = design.response();
  const auto& s = design.split();
  auto slice = [](const Series& v, std::size_t a, std::size_t b) {
    return std::span<const double>(v).subspan(a, b - a);
  };
  FitMetrics m;
  const std::size_t p = design.cols();
  m.train = split_metrics(slice(y, 0, s.train_end), slice(pred, 0, s.train_end), p);
  if (s.val_end > s.train_end) {
    m.val = split_metrics(slice(y, s.train_end, s.val_end), slice(pred, s.train_end, s.val_end), p);
    m.test = split_metrics(slice(y, s.val_end, s.test_end), slice(pred, s.val_end, s.test_end), p);
  }
  return m;
}

}  // namespace mmm
