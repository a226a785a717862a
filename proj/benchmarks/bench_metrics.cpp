#include <benchmark/benchmark.h>

#include "hmc/engine.hpp"
#include "hmc/metrics.hpp"
#include "hmc/random.hpp"

using namespace hmc;

namespace {

void random_scores(std::size_t n, std::vector<double>& scores,
                   std::vector<int>& labels, std::uint64_t seed) {
  Rng rng(seed);
  scores.resize(n);
  labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.uniform01();
    labels[i] = rng.uniform01() < 0.2 ? 1 : 0;
  }
  labels[0] = 1;
  labels[1] = 0;
}

}  // namespace

static void BM_AveragePrecision(benchmark::State& state) {
  std::vector<double> scores;
  std::vector<int> labels;
  random_scores(static_cast<std::size_t>(state.range(0)), scores, labels, 21);
  for (auto _ : state) {
    double ap = average_precision(scores, labels);
    benchmark::DoNotOptimize(ap);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AveragePrecision)->RangeMultiplier(4)->Range(256, 65536)->Complexity();

static void BM_RocAuc(benchmark::State& state) {
  std::vector<double> scores;
  std::vector<int> labels;
  random_scores(static_cast<std::size_t>(state.range(0)), scores, labels, 22);
  for (auto _ : state) {
    double auc = roc_auc(scores, labels);
    benchmark::DoNotOptimize(auc);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RocAuc)->RangeMultiplier(4)->Range(256, 65536)->Complexity();

static void BM_OptimumThreshold(benchmark::State& state) {
  std::vector<double> scores;
  std::vector<int> labels;
  random_scores(static_cast<std::size_t>(state.range(0)), scores, labels, 23);
  for (auto _ : state) {
    double t = optimum_threshold(scores, labels);
    benchmark::DoNotOptimize(t);
  }
}
BENCHMARK(BM_OptimumThreshold)->RangeMultiplier(4)->Range(256, 65536);
