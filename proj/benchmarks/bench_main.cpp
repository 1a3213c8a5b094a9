#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "mvdyn/picard.hpp"

using namespace mvdyn;

namespace {

SpacePtr line(std::size_t n) {
  const Interval b[] = {{0.0, 1.0}};
  const std::size_t c[] = {n};
  return share(StrategySpace::grid(b, c));
}

VitalRates rates(std::size_t n) {
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = 0.8 + 0.6 * static_cast<double>(i) / static_cast<double>(n);
  return VitalRates(1.0, 0.5, UptakeSpec{UptakeFamily::kMonod, b, std::vector<double>(n, 1.0)},
                    MortalitySpec{MortalityFamily::kDecreasing, std::vector<double>(n, 0.2),
                                  std::vector<double>(n, 0.1)});
}

SystemState initial(const SpacePtr& s) {
  return SystemState{1.0, DiscreteMeasure(s, std::vector<double>(s->size(), 1.0 / static_cast<double>(s->size())))};
}

void BM_FlatNorm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto s = line(n);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> w(n);
  for (double& x : w) x = u(rng);
  const DiscreteMeasure mu(s, w);
  for (auto _ : state) benchmark::DoNotOptimize(bl_dual_norm(mu));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FlatNorm)->RangeMultiplier(2)->Range(2, 64)->Complexity();

void BM_Integrate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto s = line(n);
  const auto x = initial(s);
  const auto prep = prepare_model(rates(n), local_mutation_kernel(s, 0.15), x);
  StepControl c;
  c.dt = 1e-2;
  c.t_end = 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(semiflow(c.t_end, x, prep.model, c));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Integrate)->Arg(5)->Arg(20)->Arg(80);

void BM_Picard(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto s = line(n);
  const auto x = initial(s);
  const auto prep = prepare_model(rates(n), local_mutation_kernel(s, 0.15), x);
  for (auto _ : state) benchmark::DoNotOptimize(picard_solve(x, prep.model));
}
BENCHMARK(BM_Picard)->Arg(5)->Arg(20);

}  // namespace
BENCHMARK_MAIN();
