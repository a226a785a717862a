#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "hmc/hierarchy.hpp"
#include "hmc/random.hpp"

using namespace hmc;

namespace {

// Random DAG at fixed density: doubling the edge count should at most
// ~double normalization time (the claim is linear in |V| + |E|).
Hierarchy dag_with_edges(std::size_t edges, std::uint64_t seed) {
  const int n = static_cast<int>(edges / 5) + 2;
  Hierarchy h;
  for (int i = 0; i < n; ++i) h.add_class("C" + std::to_string(i));
  Rng rng(seed);
  std::size_t added = 0;
  while (added < edges) {
    int a = static_cast<int>(rng.uniform_below(n));
    int b = static_cast<int>(rng.uniform_below(n));
    if (a == b) continue;
    std::size_t before = h.edge_count();
    h.add_edge("C" + std::to_string(std::min(a, b)),
               "C" + std::to_string(std::max(a, b)));
    added += h.edge_count() - before;
  }
  return h;
}

ClassCensus synthetic_census(const Hierarchy& h) {
  ClassCensus census;
  const auto n = h.class_count();
  census.annotated_count.resize(n);
  census.descendant_count.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    census.annotated_count[i] = static_cast<std::int64_t>(n - i);
  return census;
}

}  // namespace

static void BM_Normalize(benchmark::State& state) {
  Hierarchy h = dag_with_edges(static_cast<std::size_t>(state.range(0)), 7);
  ClassCensus census = synthetic_census(h);
  for (auto _ : state) {
    TreeHierarchy t = normalize(h, census);
    benchmark::DoNotOptimize(t);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Normalize)->RangeMultiplier(2)->Range(1 << 10, 1 << 17)->Complexity(benchmark::oN);

static void BM_CloseAnnotations(benchmark::State& state) {
  Hierarchy h = dag_with_edges(static_cast<std::size_t>(state.range(0)), 11);
  AnnotationMap phi;
  Rng rng(3);
  for (int i = 0; i < 500; ++i)
    phi.add("v" + std::to_string(i),
            h.class_id(static_cast<int>(rng.uniform_below(h.class_count()))));
  for (auto _ : state) {
    AnnotationMap closed = close_annotations(phi, h);
    benchmark::DoNotOptimize(closed);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CloseAnnotations)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Complexity();

static void BM_DescendantCounts(benchmark::State& state) {
  Hierarchy h = dag_with_edges(static_cast<std::size_t>(state.range(0)), 13);
  for (auto _ : state) {
    ClassCensus census = descendant_counts(h);
    benchmark::DoNotOptimize(census);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DescendantCounts)->RangeMultiplier(4)->Range(1 << 10, 1 << 14);
