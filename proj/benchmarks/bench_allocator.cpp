#include <benchmark/benchmark.h>

#include "mmm/allocator.hpp"

namespace {

mmm::ResponseModel model(int channels) {
  mmm::ResponseModel m;
  m.model_id = "1_1_1";
  const mmm::Date start = mmm::Date::from_ymd(2023, 1, 2);
  for (int i = 0; i < 52; ++i) m.dates.push_back(start + 7 * i);
  for (int c = 0; c < channels; ++c) {
    const double base = 300.0 + 150.0 * c;
    mmm::ChannelResponse ch{"channel" + std::to_string(c + 1) + "_S",
                            {2000.0 + 400.0 * c, 0.8 + 0.3 * (c % 5), 0.9 * base, 1.1 + 0.2 * (c % 3)},
                            {}};
    for (int i = 0; i < 52; ++i) ch.spend_history.push_back(base * (0.8 + 0.01 * (i % 40)));
    m.channels.push_back(std::move(ch));
  }
  return m;
}

void BM_MaxResponse(benchmark::State& state) {
  const mmm::ResponseModel m = model(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mmm::allocate(m, mmm::AllocationProblem{}));
}
BENCHMARK(BM_MaxResponse)->Arg(2)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_TargetEfficiency(benchmark::State& state) {
  const mmm::ResponseModel m = model(static_cast<int>(state.range(0)));
  const double roas = mmm::allocate(m, mmm::AllocationProblem{}).efficiency;
  mmm::AllocationProblem problem;
  problem.scenario = mmm::Scenario::target_efficiency;
  problem.target_value = 0.9 * roas;
  for (auto _ : state) benchmark::DoNotOptimize(mmm::allocate(m, problem));
}
BENCHMARK(BM_TargetEfficiency)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
