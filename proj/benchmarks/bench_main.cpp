#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "vocalscreen/dsp.hpp"
#include "vocalscreen/features.hpp"
#include "vocalscreen/metrics.hpp"
#include "vocalscreen/random.hpp"
#include "vocalscreen/random_forest.hpp"

using namespace vocalscreen;

namespace {

AudioClip noisy_tone(std::size_t n) {
  Rng rng(1);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 0.3 * std::sin(2.0 * std::numbers::pi * 220.0 * i / 8000.0) + 0.05 * rng.normal();
  return AudioClip(std::move(x), 8000);
}

void BM_AnalyzeClip(benchmark::State& state) {
  const auto clip = noisy_tone(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(analyze_clip(clip));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AnalyzeClip)->Arg(8000)->Arg(40000);

void BM_BuildFeatures(benchmark::State& state) {
  const auto clip = noisy_tone(12000);
  for (auto _ : state) benchmark::DoNotOptimize(build_custom_features(clip));
}
BENCHMARK(BM_BuildFeatures);

void BM_TrainForest(benchmark::State& state) {
  Rng rng(2);
  const std::size_t n = static_cast<std::size_t>(state.range(0)), d = 401;
  Matrix x(n, d);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i % 2;
    for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.normal() + (j < 5 ? y[i] : 0);
  }
  RandomForestParams p;
  p.n_trees = 50;
  for (auto _ : state) benchmark::DoNotOptimize(train_random_forest(x, y, p, 3));
}
BENCHMARK(BM_TrainForest)->Arg(300)->Arg(900)->Unit(benchmark::kMillisecond);

void BM_Auc(benchmark::State& state) {
  Rng rng(3);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i % 2;
    s[i] = rng.normal() + y[i];
  }
  for (auto _ : state) benchmark::DoNotOptimize(auc(s, y));
}
BENCHMARK(BM_Auc)->Arg(1000)->Arg(100000);

}  // namespace
BENCHMARK_MAIN();
