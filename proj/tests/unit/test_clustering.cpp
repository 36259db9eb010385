#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "mmm/clustering.hpp"

using namespace mmm;

namespace {

Matrix blobs(std::size_t per_blob, std::uint64_t seed, std::vector<int>* truth = nullptr) {
  const double centers[4][2] = {{0, 0}, {10, 0}, {0, 10}, {10, 10}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.6);
  Matrix pts;
  for (int b = 0; b < 4; ++b) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      pts.push_back({centers[b][0] + noise(rng), centers[b][1] + noise(rng)});
      if (truth) truth->push_back(b);
    }
  }
  return pts;
}

double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

// Textbook silhouette, point by point.
double brute_silhouette(const Matrix& x, const std::vector<int>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::map<int, std::pair<double, int>> by_cluster;
    for (std::size_t j = 0; j < x.size(); ++j) {
      auto& e = by_cluster[labels[j]];
      if (j != i) e.first += dist(x[i], x[j]);
      ++e.second;
    }
    const auto own = by_cluster[labels[i]];
    if (own.second == 1) continue;
    const double a = own.first / (own.second - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, e] : by_cluster) {
      if (label != labels[i]) b = std::min(b, e.first / e.second);
    }
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(x.size());
}

}  // namespace

TEST_CASE("column standardization") {
  const double inf = std::numeric_limits<double>::infinity();
  const Matrix pts{{1, 5, 2}, {2, 5, inf}, {3, 5, 4}, {6, 5, 0}};
  const Matrix z = standardize_columns(pts);
  for (std::size_t d = 0; d < 3; ++d) {
    double mean = 0.0, var = 0.0;
    for (const auto& p : z) mean += p[d] / 4.0;
    for (const auto& p : z) var += (p[d] - mean) * (p[d] - mean) / 3.0;
    CHECK(mean == doctest::Approx(0.0).scale(1.0));
    if (d == 1) {
      CHECK(var == 0.0);
    } else {
      CHECK(var == doctest::Approx(1.0));
    }
  }
  // The infinite entry takes the column maximum, so it ties with row 2.
  CHECK(z[1][2] == doctest::Approx(z[2][2]));
  CHECK(z[0][0] == doctest::Approx((1.0 - 3.0) / std::sqrt(14.0 / 3.0)));
}

TEST_CASE("silhouette agrees with the textbook definition") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix x(40, std::vector<double>(3));
    for (auto& p : x) {
      for (auto& v : p) v = u(rng);
    }
    const std::size_t k = 2 + static_cast<std::size_t>(rep % 4);
    std::vector<int> labels(40);
    for (std::size_t i = 0; i < 40; ++i) labels[i] = static_cast<int>(rng() % k);
    labels[0] = static_cast<int>(k - 1);  // keep every label present
    labels[1] = 0;
    CHECK(mean_silhouette(x, labels, k) == doctest::Approx(brute_silhouette(x, labels)).epsilon(1e-12));
  }
  // A singleton cluster contributes zero.
  const Matrix x{{0, 0}, {0, 1}, {5, 5}};
  CHECK(mean_silhouette(x, {0, 0, 1}, 2) == doctest::Approx(brute_silhouette(x, {0, 0, 1})));
}

TEST_CASE("k-means reaches a Lloyd fixed point") {
  const Matrix pts = blobs(25, 7);
  const KMeansResult r = kmeans(pts, 4, 10, 1);
  CHECK(r.k == 4);
  double inertia = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto own = static_cast<std::size_t>(r.labels[i]);
    for (std::size_t c = 0; c < 4; ++c) CHECK(dist(pts[i], r.centers[own]) <= dist(pts[i], r.centers[c]) + 1e-12);
    inertia += std::pow(dist(pts[i], r.centers[own]), 2);
  }
  CHECK(r.inertia == doctest::Approx(inertia));
  for (std::size_t c = 0; c < 4; ++c) {
    double sx = 0.0, sy = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (r.labels[i] != static_cast<int>(c)) continue;
      sx += pts[i][0];
      sy += pts[i][1];
      ++count;
    }
    REQUIRE(count > 0);
    CHECK(r.centers[c][0] == doctest::Approx(sx / count));
    CHECK(r.centers[c][1] == doctest::Approx(sy / count));
  }
  CHECK(kmeans(pts, 4, 10, 1).labels == r.labels);
  CHECK(kmeans(pts, 500, 1, 1).k == pts.size());
}

TEST_CASE("silhouette selection recovers separated blobs") {
  std::vector<int> truth;
  const Matrix pts = blobs(30, 11, &truth);
  const ClusterResult r = cluster_points(pts, 5);
  CHECK(r.kmeans.k == 4);
  CHECK(r.silhouette > 0.8);
  std::map<int, int> mapping;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto [it, fresh] = mapping.emplace(truth[i], r.kmeans.labels[i]);
    CHECK(it->second == r.kmeans.labels[i]);
  }
  std::set<int> distinct;
  for (const auto& [t, l] : mapping) distinct.insert(l);
  CHECK(distinct.size() == 4);
}

TEST_CASE("degenerate inputs form one cluster") {
  CHECK(cluster_points({{1, 2}, {3, 4}, {5, 6}}, 1).kmeans.k == 1);
  const ClusterResult same = cluster_points(Matrix(10, {2.0, 2.0}), 1);
  CHECK(same.kmeans.k == 1);
  CHECK(same.kmeans.labels == std::vector<int>(10, 0));
  CHECK(cluster_points({}, 1).kmeans.labels.empty());
}

TEST_CASE("candidates receive 1-based cluster ids") {
  const Matrix pts = blobs(6, 2);
  std::vector<CandidateModel> archive(pts.size() + 2);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto& m = archive[i + 1];
    for (std::size_t c = 0; c < 2; ++c) {
      ChannelSummary ch;
      ch.name = "c" + std::to_string(c);
      ch.roi = 1.0 + pts[i][c];
      ch.cpa = 1.0 / ch.roi;
      m.channels.push_back(ch);
    }
    members.push_back(i + 1);
  }
  archive[0].cluster = 7;
  const ClusterResult r = cluster_candidates(archive, members, DepVarType::revenue, 3);
  CHECK_FALSE(archive[0].cluster);
  CHECK_FALSE(archive.back().cluster);
  CHECK(r.kmeans.k == 4);
  for (std::size_t j = 0; j < members.size(); ++j) {
    REQUIRE(archive[members[j]].cluster);
    CHECK(*archive[members[j]].cluster == r.kmeans.labels[j] + 1);
  }
}
