#pragma once

#include <cstdint>
#include <vector>

#include "mmm/model.hpp"

namespace mmm {

using Matrix = std::vector<std::vector<double>>;

struct KMeansResult {
  std::size_t k = 1;
  std::vector<int> labels;  // 0-based
  Matrix centers;
  double inertia = 0.0;
};

/// Lloyd iterations from k-means++ seeds; best inertia over `restarts`.
KMeansResult kmeans(const Matrix& points, std::size_t k, int restarts, std::uint64_t seed);

/// Mean silhouette width; singleton clusters contribute 0.
double mean_silhouette(const Matrix& points, const std::vector<int>& labels, std::size_t k);

/// Column z-scores; constant columns become 0 and non-finite entries take the
/// largest finite value of their column.
Matrix standardize_columns(const Matrix& points);

struct ClusterResult {
  KMeansResult kmeans;
  double silhouette = 0.0;
};

/// Chooses k in [2, min(max_k, n - 1)] by mean silhouette (smallest k on
/// ties). k = 1 when n < 4 or every standardized point coincides.
ClusterResult cluster_points(const Matrix& points, std::uint64_t seed, std::size_t max_k = 10,
                             int restarts = 20);

/// Clusters the given archive members on their paid-channel efficiency
/// vectors and writes 1-based cluster ids.
ClusterResult cluster_candidates(std::vector<CandidateModel>& archive,
                                 const std::vector<std::size_t>& members, DepVarType type,
                                 std::uint64_t seed);

}  // namespace mmm
