#include "mmm/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mmm {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s;
}

KMeansResult lloyd(const Matrix& x, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = x.size();
  KMeansResult r;
  r.k = k;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  r.centers.push_back(x[first(rng)]);
  std::vector<double> d2(n);
  while (r.centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::numeric_limits<double>::infinity();
      for (const auto& c : r.centers) d2[i] = std::min(d2[i], sq_dist(x[i], c));
      total += d2[i];
    }
    std::size_t chosen = n - 1;
    if (total > 0.0) {
      double u = unif(rng) * total;
      for (std::size_t i = 0; i < n; ++i) {
        u -= d2[i];
        if (u < 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = first(rng);
    }
    r.centers.push_back(x[chosen]);
  }

  r.labels.assign(n, -1);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = sq_dist(x[i], r.centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = sq_dist(x[i], r.centers[c]);
        if (d < bd) {
          bd = d;
          best = static_cast<int>(c);
        }
      }
      if (r.labels[i] != best) {
        r.labels[i] = best;
        changed = true;
      }
    }
    Matrix sums(k, std::vector<double>(x[0].size(), 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(r.labels[i]);
      ++counts[c];
      for (std::size_t d = 0; d < x[i].size(); ++d) sums[c][d] += x[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Reseed an empty cluster at the point farthest from its center.
        std::size_t far = 0;
        double fd = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = sq_dist(x[i], r.centers[static_cast<std::size_t>(r.labels[i])]);
          if (d > fd) {
            fd = d;
            far = i;
          }
        }
        r.centers[c] = x[far];
        r.labels[far] = static_cast<int>(c);
        changed = true;
        continue;
      }
      for (std::size_t d = 0; d < sums[c].size(); ++d) {
        r.centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
      }
    }
    if (!changed) break;
  }
  r.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r.inertia += sq_dist(x[i], r.centers[static_cast<std::size_t>(r.labels[i])]);
  }
  return r;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, int restarts, std::uint64_t seed) {
  KMeansResult best;
  if (points.empty() || k == 0) return best;
  k = std::min(k, points.size());
  std::mt19937_64 rng(seed);
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    KMeansResult cand = lloyd(points, k, rng);
    if (cand.inertia < best.inertia) best = std::move(cand);
  }
  return best;
}

double mean_silhouette(const Matrix& points, const std::vector<int>& labels, std::size_t k) {
  const std::size_t n = points.size();
  if (n == 0) return 0.0;
  std::vector<std::size_t> sizes(k, 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  double total = 0.0;
  std::vector<double> sum(k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (sizes[own] <= 1) continue;
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum[static_cast<std::size_t>(labels[j])] += std::sqrt(sq_dist(points[i], points[j]));
    }
    const double a = sum[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own && sizes[c] > 0) b = std::min(b, sum[c] / static_cast<double>(sizes[c]));
    }
    const double m = std::max(a, b);
    if (std::isfinite(b) && m > 0.0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

Matrix standardize_columns(const Matrix& points) {
  Matrix z = points;
  if (points.empty()) return z;
  const std::size_t n = points.size();
  for (std::size_t d = 0; d < points[0].size(); ++d) {
    double cap = 0.0;
    bool any = false;
    for (const auto& p : points) {
      if (std::isfinite(p[d])) {
        cap = any ? std::max(cap, p[d]) : p[d];
        any = true;
      }
    }
    for (auto& p : z) {
      if (!std::isfinite(p[d])) p[d] = cap;
    }
    double mean = 0.0;
    for (const auto& p : z) mean += p[d];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& p : z) var += (p[d] - mean) * (p[d] - mean);
    const double sd = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
    for (auto& p : z) p[d] = sd > 0.0 ? (p[d] - mean) / sd : 0.0;
  }
  return z;
}

ClusterResult cluster_points(const Matrix& points, std::uint64_t seed, std::size_t max_k, int restarts) {
  ClusterResult out;
  const std::size_t n = points.size();
  out.kmeans.k = 1;
  out.kmeans.labels.assign(n, 0);
  if (n == 0) return out;
  const Matrix z = standardize_columns(points);
  out.kmeans.centers.assign(1, std::vector<double>(z[0].size(), 0.0));
  const bool dispersed = std::any_of(z.begin(), z.end(), [&](const std::vector<double>& p) {
    return sq_dist(p, z[0]) > 0.0;
  });
  if (n < 4 || !dispersed) return out;

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k <= std::min(max_k, n - 1); ++k) {
    KMeansResult r = kmeans(z, k, restarts, seed + k);
    const double s = mean_silhouette(z, r.labels, k);
    if (s > best) {
      best = s;
      out.kmeans = std::move(r);
      out.silhouette = s;
    }
  }
  return out;
}

ClusterResult cluster_candidates(std::vector<CandidateModel>& archive,
                                 const std::vector<std::size_t>& members, DepVarType type,
                                 std::uint64_t seed) {
  Matrix points;
  points.reserve(members.size());
  for (std::size_t i : members) points.push_back(archive[i].efficiency(type));
  ClusterResult r = cluster_points(points, seed);
  for (auto& m : archive) m.cluster.reset();
  for (std::size_t j = 0; j < members.size(); ++j) archive[members[j]].cluster = r.kmeans.labels[j] + 1;
  return r;
}

}  // namespace mmm
