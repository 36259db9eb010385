#include <benchmark/benchmark.h>

#include <limits>
#include <random>
#include <vector>

#include "mmm/regression.hpp"

namespace {

// Gram matrix and cross products of a random standardized design.
struct Problem {
  std::vector<double> gram, zty, lower;
};

Problem make_problem(std::size_t p, std::size_t n = 150) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> x(n * p), y(n);
  for (auto& v : x) v = g(rng);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = g(rng);
    for (std::size_t j = 0; j < p; ++j) y[i] += 0.3 * x[i * p + j];
  }
  Problem pr{std::vector<double>(p * p, 0.0), std::vector<double>(p, 0.0), std::vector<double>(p)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      pr.zty[j] += x[i * p + j] * y[i];
      for (std::size_t k = 0; k < p; ++k) pr.gram[j * p + k] += x[i * p + j] * x[i * p + k];
    }
  }
  for (std::size_t j = 0; j < p; ++j) pr.lower[j] = j % 2 == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return pr;
}

void BM_RidgeCoordinateDescent(benchmark::State& state) {
  const Problem pr = make_problem(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mmm::solve_ridge_cd(pr.gram, pr.zty, 5.0, pr.lower));
}
BENCHMARK(BM_RidgeCoordinateDescent)->Arg(5)->Arg(12)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
