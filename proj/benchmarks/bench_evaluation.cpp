#include <benchmark/benchmark.h>

#include <random>

#include "mmm/decomposition.hpp"
#include "mmm/model.hpp"
#include "mmm/simulator.hpp"

namespace {

struct Setup {
  mmm::Simulation sim;
  mmm::ModelContext context;
};

Setup make_setup(std::size_t lift_studies) {
  mmm::SimulationConfig sc;
  sc.seed = 5;
  mmm::Simulation sim = mmm::simulate(sc);
  mmm::MmmDataset ds = mmm::build_dataset(sim.table, sim.roles, sim.window);
  mmm::DecompositionConfig dc;
  dc.components = sim.roles.prophet_vars;
  dc.country = sim.roles.prophet_country;
  mmm::DecompositionResult dec = mmm::decompose(ds, sim.holidays, dc);
  auto studies = sim.cut_lift_studies(lift_studies, 8, 5);
  mmm::ModelContext ctx(std::move(ds), std::move(dec), mmm::ModelSpec{}, std::move(studies));
  return {std::move(sim), std::move(ctx)};
}

void BM_EvaluateCandidate(benchmark::State& state) {
  const Setup s = make_setup(static_cast<std::size_t>(state.range(0)));
  const mmm::HyperparameterSpace space = s.context.default_space();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<mmm::HyperparameterVector> points;
  for (int k = 0; k < 64; ++k) {
    std::vector<double> unit(space.dimension());
    for (auto& v : unit) v = u(rng);
    points.push_back(space.decode(unit));
  }
  std::size_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(mmm::evaluate_candidate(s.context, space, points[k++ % points.size()]));
}
BENCHMARK(BM_EvaluateCandidate)->Arg(0)->Arg(3)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
