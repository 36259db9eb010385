#include "mmm/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmm/error.hpp"

namespace mmm {

std::string to_string(AdstockFamily f) {
  switch (f) {
    case AdstockFamily::geometric:
      return "geometric";
    case AdstockFamily::weibull_cdf:
      return "weibull_cdf";
    case AdstockFamily::weibull_pdf:
      return "weibull_pdf";
  }
  return "?";
}

AdstockFamily parse_adstock_family(std::string_view text) {
  if (text == "geometric") return AdstockFamily::geometric;
  if (text == "weibull_cdf") return AdstockFamily::weibull_cdf;
  if (text == "weibull_pdf") return AdstockFamily::weibull_pdf;
  throw InputError("transforms", "adstock must be geometric, weibull_cdf or weibull_pdf, got '" +
                                     std::string(text) + "'");
}

void AdstockParams::validate() const {
  auto fail = [](const std::string& m) { throw InputError("transforms", m); };
  if (family == AdstockFamily::geometric) {
    if (!(theta >= 0.0 && theta < 1.0)) fail("theta must be in [0, 1), got " + std::to_string(theta));
    return;
  }
  if (!(shape > 0.0) || !std::isfinite(shape)) fail("Weibull shape must be > 0");
  if (!(scale > 0.0 && scale < 1.0)) fail("Weibull scale must be in (0, 1)");
  if (max_lag < 1) fail("max_lag must be >= 1");
}

void SaturationParams::validate() const {
  auto fail = [](const std::string& m) { throw InputError("transforms", m); };
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma must be in (0, 1]");
}

Series adstock_geometric(std::span<const double> x, double theta) {
  if (!(theta >= 0.0 && theta < 1.0)) {
    throw InputError("transforms", "theta must be in [0, 1), got " + std::to_string(theta));
  }
  Series out(x.size());
  double carry = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    carry = x[t] + theta * carry;
    out[t] = carry;
  }
  return out;
}

Series weibull_lag_weights(AdstockFamily family, double shape, double scale, std::size_t max_lag) {
  AdstockParams p{family, 0.0, shape, scale, max_lag};
  if (family == AdstockFamily::geometric) {
    throw InputError("transforms", "weibull_lag_weights needs a Weibull family");
  }
  p.validate();
  const double lambda = std::max(1.0, std::ceil(scale * static_cast<double>(max_lag)));
  Series w(max_lag);
  if (family == AdstockFamily::weibull_cdf) {
    for (std::size_t l = 0; l < max_lag; ++l) {
      w[l] = std::exp(-std::pow(static_cast<double>(l) / lambda, shape));
    }
    return w;
  }
  // Log-density keeps tiny shapes and long tails finite before rescaling.
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < max_lag; ++l) {
    const double x = (static_cast<double>(l) + 0.5) / lambda;
    w[l] = std::log(shape / lambda) + (shape - 1.0) * std::log(x) - std::pow(x, shape);
    peak = std::max(peak, w[l]);
  }
  for (double& v : w) v = std::exp(v - peak);
  return w;
}

Series convolve_lags(std::span<const double> x, std::span<const double> weights) {
  Series out(x.size(), 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    const std::size_t lags = std::min(t + 1, weights.size());
    double acc = 0.0;
    for (std::size_t l = 0; l < lags; ++l) acc += weights[l] * x[t - l];
    out[t] = acc;
  }
  return out;
}

Series adstock_weibull(std::span<const double> x, AdstockFamily family, double shape, double scale,
                       std::size_t max_lag) {
  const Series w = weibull_lag_weights(family, shape, scale, max_lag);
  return convolve_lags(x, w);
}

Series adstock(std::span<const double> x, const AdstockParams& p) {
  if (p.family == AdstockFamily::geometric) return adstock_geometric(x, p.theta);
  return adstock_weibull(x, p.family, p.shape, p.scale, p.max_lag);
}

Series lag_weights(const AdstockParams& p, std::size_t count) {
  if (p.family == AdstockFamily::geometric) {
    p.validate();
    Series w(count);
    double v = 1.0;
    for (auto& e : w) {
      e = v;
      v *= p.theta;
    }
    return w;
  }
  Series w = weibull_lag_weights(p.family, p.shape, p.scale, p.max_lag);
  w.resize(std::min(count, w.size()));
  return w;
}

double hill(double v, double alpha, double inflection) {
  if (v <= 0.0) return 0.0;
  // (c/v)^alpha form avoids overflow of v^alpha for large spend.
  return 1.0 / (1.0 + std::pow(inflection / v, alpha));
}

double hill_derivative(double v, double alpha, double inflection) {
  if (v <= 0.0) {
    if (alpha < 1.0) return std::numeric_limits<double>::infinity();
    if (alpha == 1.0) return 1.0 / inflection;
    return 0.0;
  }
  const double r = std::pow(inflection / v, alpha);
  return alpha * r / (v * (1.0 + r) * (1.0 + r));
}

Saturated saturate_hill(std::span<const double> x, double alpha, double gamma) {
  SaturationParams{alpha, gamma}.validate();
  if (x.empty()) throw InputError("transforms", "cannot saturate an empty series");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (!(*hi > *lo)) {
    throw InputError("transforms", "constant series has no defined inflection");
  }
  Saturated s;
  s.inflection = *lo + gamma * (*hi - *lo);
  s.values.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s.values[i] = hill(x[i], alpha, s.inflection);
  return s;
}

TransformedChannel transform_channel(std::span<const double> spend, std::size_t window_begin,
                                     std::size_t window_end, const AdstockParams& ad,
                                     const SaturationParams& sat) {
  ad.validate();
  sat.validate();
  if (window_begin >= window_end || window_end > spend.size()) {
    throw InputError("transforms", "invalid window range");
  }
  TransformedChannel out;
  Series full = adstock(spend, ad);
  out.adstocked.assign(full.begin() + static_cast<std::ptrdiff_t>(window_begin),
                       full.begin() + static_cast<std::ptrdiff_t>(window_end));
  Saturated s = saturate_hill(out.adstocked, sat.alpha, sat.gamma);
  out.saturated = std::move(s.values);
  out.inflection = s.inflection;

  const std::size_t kernel = ad.family == AdstockFamily::geometric ? std::size_t{20} : ad.max_lag;
  out.lag_weights = lag_weights(ad, kernel);
  const double w0 = out.lag_weights.empty() ? 1.0 : out.lag_weights.front();

  out.immediate_saturated.resize(out.adstocked.size());
  double raw_sum = 0.0;
  double ad_sum = 0.0;
  for (std::size_t i = 0; i < out.adstocked.size(); ++i) {
    const double raw = spend[window_begin + i];
    out.immediate_saturated[i] = hill(w0 * raw, sat.alpha, out.inflection);
    raw_sum += raw;
    ad_sum += out.adstocked[i];
  }
  out.adstock_ratio = raw_sum > 0.0 ? ad_sum / raw_sum : std::numeric_limits<double>::quiet_NaN();
  return out;
}

TransformedChannel transform_channel(std::span<const double> spend, const AdstockParams& ad,
                                     const SaturationParams& sat) {
  return transform_channel(spend, 0, spend.size(), ad, sat);
}

double ResponseCurve::value(double spend) const {
  return coefficient * hill(adstock_ratio * spend, alpha, inflection);
}

double ResponseCurve::derivative(double spend) const {
  return coefficient * adstock_ratio * hill_derivative(adstock_ratio * spend, alpha, inflection);
}

}  // namespace mmm
