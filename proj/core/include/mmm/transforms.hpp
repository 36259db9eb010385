#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmm {

using Series = std::vector<double>;

enum class AdstockFamily { geometric, weibull_cdf, weibull_pdf };

std::string to_string(AdstockFamily f);
AdstockFamily parse_adstock_family(std::string_view text);

struct AdstockParams {
  AdstockFamily family = AdstockFamily::geometric;
  double theta = 0.0;  // geometric decay, [0, 1)
  double shape = 1.0;  // Weibull shape, > 0
  double scale = 0.5;  // Weibull scale, (0, 1)
  std::size_t max_lag = 1;

  void validate() const;
};

struct SaturationParams {
  double alpha = 1.0;  // curve shape, > 0
  double gamma = 0.5;  // inflection position, (0, 1]

  void validate() const;
};

/// x'_0 = x_0, x'_t = x_t + theta * x'_{t-1}.
Series adstock_geometric(std::span<const double> x, double theta);

/// Weibull lag weights for l = 0..max_lag-1 with effective scale
/// max(1, ceil(scale * max_lag)). CDF family: survival exp(-(l/lambda)^shape),
/// so w_0 = 1. PDF family: density at l + 0.5 rescaled to a peak of 1.
Series weibull_lag_weights(AdstockFamily family, double shape, double scale, std::size_t max_lag);

/// x'_t = sum_{l=0}^{min(t, L-1)} w_l x_{t-l}.
Series convolve_lags(std::span<const double> x, std::span<const double> weights);

Series adstock_weibull(std::span<const double> x, AdstockFamily family, double shape, double scale,
                       std::size_t max_lag);

Series adstock(std::span<const double> x, const AdstockParams& p);

/// First `count` lag weights of the carryover kernel (theta^l for geometric).
Series lag_weights(const AdstockParams& p, std::size_t count);

/// v^alpha / (v^alpha + c^alpha); 0 for v <= 0.
double hill(double v, double alpha, double inflection);
/// d/dv of hill(v).
double hill_derivative(double v, double alpha, double inflection);

struct Saturated {
  Series values;
  double inflection = 0.0;
};

/// Inflection c = min + gamma * (max - min) over `x_adstocked`. Throws on a
/// constant series.
Saturated saturate_hill(std::span<const double> x_adstocked, double alpha, double gamma);

struct TransformedChannel {
  Series adstocked;  // window rows
  Series saturated;  // window rows
  /// Hill of the lag-0 part only (lag weights beyond 0 zeroed), same inflection.
  Series immediate_saturated;
  double inflection = 0.0;
  Series lag_weights;
  /// mean(adstocked) / mean(raw) over the window.
  double adstock_ratio = 0.0;
};

/// Adstock over the full history, then saturate the window rows
/// [window_begin, window_end).
TransformedChannel transform_channel(std::span<const double> spend, std::size_t window_begin,
                                     std::size_t window_end, const AdstockParams& adstock,
                                     const SaturationParams& saturation);
TransformedChannel transform_channel(std::span<const double> spend, const AdstockParams& adstock,
                                     const SaturationParams& saturation);

/// Per-period response of a channel to a mean per-period spend m:
/// coefficient * hill(adstock_ratio * m; alpha, inflection).
struct ResponseCurve {
  double coefficient = 0.0;
  double alpha = 1.0;
  double inflection = 1.0;
  double adstock_ratio = 1.0;

  double value(double spend) const;
  double derivative(double spend) const;
};

}  // namespace mmm
