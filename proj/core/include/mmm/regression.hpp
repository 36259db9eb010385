#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmm/transforms.hpp"

namespace mmm {

enum class ColumnGroup { paid_media, organic, context, decomposition };

std::string to_string(ColumnGroup g);
ColumnGroup parse_column_group(std::string_view text);

/// Chronological train / validation / test partition. Validation and test
/// each take half of what training leaves.
struct SplitPlan {
  double train_fraction = 0.7;
  bool ts_validation = true;

  void validate() const;
  bool operator==(const SplitPlan&) const = default;
};

struct SplitRanges {
  std::size_t train_end = 0;  // train = [0, train_end)
  std::size_t val_end = 0;    // val = [train_end, val_end)
  std::size_t test_end = 0;   // test = [val_end, test_end)
};

/// Throws InputError when any split would be empty.
SplitRanges split_ranges(const SplitPlan& plan, std::size_t n);

/// Named regressors over the modeling window with z-score constants taken
/// from the training rows. The response is standardized the same way.
class DesignMatrix {
 public:
  struct Column {
    std::string name;
    ColumnGroup group;
    Series values;
  };

  /// Throws InputError if a column is constant over the training rows.
  DesignMatrix(std::vector<Column> columns, Series response, const SplitPlan& split);

  std::size_t rows() const { return response_.size(); }
  std::size_t cols() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }
  const Series& response() const { return response_; }
  const SplitRanges& split() const { return split_; }
  std::size_t train_rows() const { return split_.train_end; }

  double mean(std::size_t j) const { return means_[j]; }
  double sd(std::size_t j) const { return sds_[j]; }
  double response_mean() const { return y_mean_; }
  double response_sd() const { return y_sd_; }

  double z(std::size_t j, std::size_t t) const { return (columns_[j].values[t] - means_[j]) / sds_[j]; }
  double y_std(std::size_t t) const { return (response_[t] - y_mean_) / y_sd_; }

  /// Z'Z and Z'y over the training rows, row-major p x p and p.
  void training_moments(std::vector<double>& gram, std::vector<double>& zty) const;

 private:
  std::vector<Column> columns_;
  Series response_;
  SplitRanges split_;
  std::vector<double> means_;
  std::vector<double> sds_;
  double y_mean_ = 0.0;
  double y_sd_ = 1.0;
};

struct LambdaBounds {
  double min = 0.0;
  double max = 0.0;
  bool degenerate = false;

  /// Affine map of the [0, 1] lambda hyperparameter onto [min, max].
  double at(double h) const { return min + h * (max - min); }
};

/// lambda_max = max_j |z_j . y| / (0.001 n), lambda_min = 1e-4 lambda_max,
/// over the standardized training rows.
LambdaBounds lambda_bounds(const DesignMatrix& design);

struct CoordinateDescentResult {
  std::vector<double> beta;
  bool converged = false;
  int sweeps = 0;
};

/// Minimizes b'Gb - 2b'c + lambda |b|^2 subject to b_j >= lower_j by cyclic
/// coordinate descent with clamping. Stops once a sweep changes no coefficient
/// by more than `tol` and the projected gradient is below `tol`, or after
/// `max_sweeps`.
CoordinateDescentResult solve_ridge_cd(std::span<const double> gram, std::span<const double> zty,
                                       double lambda, std::span<const double> lower,
                                       double tol = 1e-7, int max_sweeps = 1000);

struct RidgeFit {
  double lambda = 0.0;
  std::vector<double> coef_std;  // standardized scale
  std::vector<double> coef;      // data units
  double intercept = 0.0;        // data units
  bool converged = false;
  int sweeps = 0;

  Series predict(const DesignMatrix& design) const;
  /// Prediction through the standardized representation.
  Series predict_standardized(const DesignMatrix& design) const;
};

/// Zero lower bound for paid media and organic columns, unbounded otherwise.
std::vector<double> default_lower_bounds(const DesignMatrix& design);

RidgeFit fit_ridge(const DesignMatrix& design, double lambda, std::span<const double> lower_bounds);

struct SplitMetrics {
  std::size_t n = 0;
  double nrmse = 0.0;
  double r2 = 0.0;
  double adj_r2 = 0.0;
};

struct FitMetrics {
  SplitMetrics train;
  std::optional<SplitMetrics> val;
  std::optional<SplitMetrics> test;

  /// Validation NRMSE when a validation split exists, else training NRMSE.
  double selection_nrmse() const { return val ? val->nrmse : train.nrmse; }
};

/// RMSE / (max(y) - min(y)) over the given rows. Throws on constant actuals.
double nrmse(std::span<const double> actual, std::span<const double> predicted);
SplitMetrics split_metrics(std::span<const double> actual, std::span<const double> predicted,
                           std::size_t predictors);

FitMetrics score_fit(const RidgeFit& fit, const DesignMatrix& design);

}  // namespace mmm
