#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mmm/pareto.hpp"

namespace {

std::vector<std::vector<double>> points(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  for (auto& p : pts) {
    for (auto& v : p) v = u(rng);
  }
  return pts;
}

void BM_NondominatedSort(benchmark::State& state) {
  const auto pts = points(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(mmm::nondominated_sort(pts));
}
BENCHMARK(BM_NondominatedSort)->Args({1000, 2})->Args({10000, 2})->Args({10000, 3})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
