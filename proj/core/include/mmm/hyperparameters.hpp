#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmm/transforms.hpp"

namespace mmm {

struct Bounds {
  double lower = 0.0;
  double upper = 1.0;

  double width() const { return upper - lower; }
  /// Affine map from [0, 1]; u is clamped.
  double decode(double u) const;
  bool operator==(const Bounds&) const = default;
};

/// A point in the hyperparameter space, keyed by names such as
/// "tv_S_thetas", "tv_S_alphas", "tv_S_gammas" and "lambda".
struct HyperparameterVector {
  std::vector<std::string> names;
  std::vector<double> values;

  double get(std::string_view name) const;
  void set(std::string_view name, double value);
  bool operator==(const HyperparameterVector&) const = default;
};

std::string hyperparameter_name(std::string_view channel, std::string_view param);

/// Per-channel adstock and saturation bounds for one adstock family, plus the
/// [0, 1] lambda hyperparameter.
class HyperparameterSpace {
 public:
  HyperparameterSpace() = default;
  /// Default bounds: geometric theta (0, 0.8); weibull_cdf shape (0, 2) and
  /// scale (0, 0.1); weibull_pdf shape (0.0001, 10) and scale (0, 0.1);
  /// alpha (0.5, 3); gamma (0.3, 1); lambda (0, 1).
  HyperparameterSpace(AdstockFamily family, std::vector<std::string> channels);

  AdstockFamily family() const { return family_; }
  const std::vector<std::string>& channels() const { return channels_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Bounds>& bounds() const { return bounds_; }
  std::size_t dimension() const { return names_.size(); }

  const Bounds& bounds(std::string_view name) const;
  /// Throws InputError for unknown names or lower >= upper.
  void set_bounds(std::string_view name, Bounds b);

  HyperparameterVector decode(std::span<const double> unit) const;
  /// Inverse of decode, for values inside the bounds.
  std::vector<double> encode(const HyperparameterVector& hp) const;

  /// Bounds shrunk to selected +- fraction * original width, clipped to the
  /// original bounds.
  HyperparameterSpace narrowed(const HyperparameterVector& selected, double fraction = 0.1) const;
  bool contains(const HyperparameterSpace& other) const;

  /// Adstock/saturation parameters of channel `i` (max_lag left at 1).
  AdstockParams adstock_params(const HyperparameterVector& hp, std::size_t i) const;
  SaturationParams saturation_params(const HyperparameterVector& hp, std::size_t i) const;

  bool operator==(const HyperparameterSpace&) const = default;

 private:
  std::size_t index_of(std::string_view name) const;

  AdstockFamily family_ = AdstockFamily::geometric;
  std::vector<std::string> channels_;
  std::vector<std::string> names_;
  std::vector<Bounds> bounds_;
};

}  // namespace mmm
