#include <benchmark/benchmark.h>

#include <random>

#include "mmm/transforms.hpp"

namespace {

mmm::Series spend(std::size_t n) {
  std::mt19937_64 rng(1);
  std::lognormal_distribution<double> d(8.0, 0.5);
  mmm::Series x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

void BM_Geometric(benchmark::State& state) {
  const auto x = spend(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mmm::adstock_geometric(x, 0.4));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Geometric)->Arg(208)->Arg(1095);

void BM_WeibullPdf(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = spend(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mmm::adstock_weibull(x, mmm::AdstockFamily::weibull_pdf, 2.0, 0.1, n));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WeibullPdf)->Arg(208)->Arg(1095);

void BM_SaturateHill(benchmark::State& state) {
  const auto x = mmm::adstock_geometric(spend(static_cast<std::size_t>(state.range(0))), 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(mmm::saturate_hill(x, 1.8, 0.6));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SaturateHill)->Arg(208)->Arg(1095);

}  // namespace

BENCHMARK_MAIN();
