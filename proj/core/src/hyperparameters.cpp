#include "mmm/hyperparameters.hpp"

#include <algorithm>
#include <cmath>

#include "mmm/error.hpp"

namespace mmm {

double Bounds::decode(double u) const { return lower + std::clamp(u, 0.0, 1.0) * (upper - lower); }

double HyperparameterVector::get(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  throw InputError("search", "unknown hyperparameter '" + std::string(name) + "'");
}

void HyperparameterVector::set(std::string_view name, double value) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) {
      values[i] = value;
      return;
    }
  }
  throw InputError("search", "unknown hyperparameter '" + std::string(name) + "'");
}

std::string hyperparameter_name(std::string_view channel, std::string_view param) {
  return std::string(channel) + "_" + std::string(param);
}

HyperparameterSpace::HyperparameterSpace(AdstockFamily family, std::vector<std::string> channels)
    : family_(family), channels_(std::move(channels)) {
  if (channels_.empty()) throw InputError("search", "hyperparameter space needs channels");
  for (const auto& c : channels_) {
    switch (family_) {
      case AdstockFamily::geometric:
        names_.push_back(hyperparameter_name(c, "thetas"));
        bounds_.push_back({0.0, 0.8});
        break;
      case AdstockFamily::weibull_cdf:
        names_.push_back(hyperparameter_name(c, "shapes"));
        bounds_.push_back({0.0, 2.0});
        names_.push_back(hyperparameter_name(c, "scales"));
        bounds_.push_back({0.0, 0.1});
        break;
      case AdstockFamily::weibull_pdf:
        names_.push_back(hyperparameter_name(c, "shapes"));
        bounds_.push_back({0.0001, 10.0});
        names_.push_back(hyperparameter_name(c, "scales"));
        bounds_.push_back({0.0, 0.1});
        break;
    }
    names_.push_back(hyperparameter_name(c, "alphas"));
    bounds_.push_back({0.5, 3.0});
    names_.push_back(hyperparameter_name(c, "gammas"));
    bounds_.push_back({0.3, 1.0});
  }
  names_.emplace_back("lambda");
  bounds_.push_back({0.0, 1.0});
}

std::size_t HyperparameterSpace::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  throw InputError("search", "unknown hyperparameter '" + std::string(name) + "'");
}

const Bounds& HyperparameterSpace::bounds(std::string_view name) const {
  return bounds_[index_of(name)];
}

void HyperparameterSpace::set_bounds(std::string_view name, Bounds b) {
  if (!(b.lower < b.upper) || !std::isfinite(b.lower) || !std::isfinite(b.upper)) {
    throw InputError("search", "bounds for '" + std::string(name) + "' need lower < upper");
  }
  bounds_[index_of(name)] = b;
}

HyperparameterVector HyperparameterSpace::decode(std::span<const double> unit) const {
  if (unit.size() != dimension()) throw InputError("search", "unit vector has wrong dimension");
  HyperparameterVector hp;
  hp.names = names_;
  hp.values.resize(dimension());
  for (std::size_t i = 0; i < dimension(); ++i) hp.values[i] = bounds_[i].decode(unit[i]);
  return hp;
}

std::vector<double> HyperparameterSpace::encode(const HyperparameterVector& hp) const {
  std::vector<double> u(dimension());
  for (std::size_t i = 0; i < dimension(); ++i) {
    const auto& b = bounds_[i];
    u[i] = std::clamp((hp.get(names_[i]) - b.lower) / b.width(), 0.0, 1.0);
  }
  return u;
}

HyperparameterSpace HyperparameterSpace::narrowed(const HyperparameterVector& selected,
                                                  double fraction) const {
  HyperparameterSpace out = *this;
  for (std::size_t i = 0; i < dimension(); ++i) {
    const auto& b = bounds_[i];
    const double v = selected.get(names_[i]);
    const double half = fraction * b.width();
    out.bounds_[i] = {std::max(b.lower, v - half), std::min(b.upper, v + half)};
    if (!(out.bounds_[i].lower < out.bounds_[i].upper)) {
      throw InputError("search", "selected value of '" + names_[i] + "' lies outside its bounds");
    }
  }
  return out;
}

bool HyperparameterSpace::contains(const HyperparameterSpace& other) const {
  if (other.names_ != names_) return false;
  for (std::size_t i = 0; i < dimension(); ++i) {
    if (other.bounds_[i].lower < bounds_[i].lower || other.bounds_[i].upper > bounds_[i].upper) {
      return false;
    }
  }
  return true;
}

AdstockParams HyperparameterSpace::adstock_params(const HyperparameterVector& hp,
                                                  std::size_t i) const {
  AdstockParams p;
  p.family = family_;
  const auto& c = channels_.at(i);
  if (family_ == AdstockFamily::geometric) {
    p.theta = hp.get(hyperparameter_name(c, "thetas"));
  } else {
    p.shape = hp.get(hyperparameter_name(c, "shapes"));
    p.scale = hp.get(hyperparameter_name(c, "scales"));
  }
  return p;
}

SaturationParams HyperparameterSpace::saturation_params(const HyperparameterVector& hp,
                                                        std::size_t i) const {
  const auto& c = channels_.at(i);
  return {hp.get(hyperparameter_name(c, "alphas")), hp.get(hyperparameter_name(c, "gammas"))};
}

}  // namespace mmm
