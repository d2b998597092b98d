#include <benchmark/benchmark.h>

#include "sojourn/berman.hpp"
#include "sojourn/mc.hpp"
#include "sojourn/process.hpp"
#include "sojourn/rng.hpp"
#include "sojourn/sojourn.hpp"

namespace {

void BM_NormalDraws(benchmark::State& state) {
  sojourn::CounterRng rng(1, 0);
  double acc = 0.0;
  for (auto _ : state) acc += rng.normal();
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_NormalDraws);

void BM_BrownianPath(benchmark::State& state) {
  const auto steps = static_cast<std::size_t>(state.range(0));
  sojourn::PathSampler sampler(sojourn::BrownianDrift{}, steps, 1.0 / 4096.0);
  std::vector<double> buf(steps + 1);
  std::uint64_t r = 0;
  for (auto _ : state) {
    sojourn::CounterRng rng(2, r++);
    sampler.sample(rng, buf);
    benchmark::DoNotOptimize(buf.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(steps));
}
BENCHMARK(BM_BrownianPath)->Arg(1 << 12)->Arg(1 << 15);

void BM_FbmPath(benchmark::State& state) {
  const auto steps = static_cast<std::size_t>(state.range(0));
  sojourn::PathSampler sampler(sojourn::Fbm{0.7}, steps, 1.0 / 1024.0);
  std::vector<double> buf(steps + 1);
  std::uint64_t r = 0;
  for (auto _ : state) {
    sojourn::CounterRng rng(3, r++);
    sampler.sample(rng, buf);
    benchmark::DoNotOptimize(buf.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(steps));
}
BENCHMARK(BM_FbmPath)->Arg(1 << 10)->Arg(1 << 13);

void BM_SojournTime(benchmark::State& state) {
  const sojourn::GridSpec grid = sojourn::build_grid(8.0, 1 << 15);
  const sojourn::SamplePath path = sojourn::simulate(sojourn::BrownianDrift{}, grid, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sojourn::sojourn_time(path, 1.0, 0.5, 0.0, 8.0));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * (1 << 15));
}
BENCHMARK(BM_SojournTime);

void BM_ZstarWeight(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> field(n);
  sojourn::CounterRng rng(5, 0);
  for (auto& v : field) v = rng.normal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(sojourn::zstar_weight(field, 1.0 / 1024.0, 0.5));
  }
}
BENCHMARK(BM_ZstarWeight)->Arg(1 << 13)->Arg(1 << 15);

}  // namespace

BENCHMARK_MAIN();
