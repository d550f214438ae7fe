#include <benchmark/benchmark.h>

#include "wiener/bla.hpp"
#include "wiener/experiment.hpp"
#include "wiener/indirect.hpp"
#include "wiener/ml.hpp"
#include "wiener/numerics.hpp"
#include "wiener/pem.hpp"

using namespace wiener;

namespace {

const DataRecord& reference_data() {
  static const DataRecord data = generate_realization(ExperimentConfig{}, 0);
  return data;
}

void BM_GaussHermite(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(gauss_hermite(static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_GaussHermite)->Arg(50)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Likelihood(benchmark::State& state) {
  MlSettings settings;
  settings.quad_order = static_cast<std::size_t>(state.range(0));
  settings.adaptive = state.range(1) != 0;
  const LikelihoodEvaluator l(reference_data(), SystemSpec{}, settings);
  double theta = 0.4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(l(theta));
    theta = theta > 0.6 ? 0.4 : theta + 0.01;
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(reference_data().N()));
}
BENCHMARK(BM_Likelihood)->ArgNames({"order", "adaptive"})->Args({200, 1})->Args({1000, 1})->Args({1000, 0})
    ->Unit(benchmark::kMillisecond);

void BM_PemEstimate(benchmark::State& state) {
  const bool weighted = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(pem_estimate(reference_data(), SystemSpec{}, weighted));
}
BENCHMARK(BM_PemEstimate)->ArgName("weighted")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BlaWithWeighting(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(estimate_weighting(reference_data(), fit_bla(reference_data(), {0, 1})));
}
BENCHMARK(BM_BlaWithWeighting)->Unit(benchmark::kMicrosecond);

void BM_Step2Analytic(benchmark::State& state) {
  const auto bla = estimate_weighting(reference_data(), fit_bla(reference_data(), {0, 1}));
  const auto map = BetaMap::analytic_gaussian(1.0 / 3.0, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(step2(bla, bla.W, Weighting::Sandwich, map));
}
BENCHMARK(BM_Step2Analytic)->Unit(benchmark::kMicrosecond);

void BM_SimulatedMap(benchmark::State& state) {
  const auto S = static_cast<std::size_t>(state.range(0));
  const SimulatedBetaMap map(reference_data().u, 1, SystemSpec{}, S, Seed{1}, {0, 1});
  for (auto _ : state) benchmark::DoNotOptimize(map(0.5));
}
BENCHMARK(BM_SimulatedMap)->ArgName("S")->Arg(1)->Arg(10)->Arg(50)->Unit(benchmark::kMicrosecond);

void BM_Realization(benchmark::State& state) {
  ExperimentConfig config;
  std::size_t r = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_realization(config, r++));
}
BENCHMARK(BM_Realization)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
