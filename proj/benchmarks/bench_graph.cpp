#include <benchmark/benchmark.h>

#include "hmc/embedding.hpp"
#include "hmc/network.hpp"
#include "hmc/random.hpp"

using namespace hmc;

namespace {

Network random_graph(int nodes, double degree_target, std::uint64_t seed) {
  Rng rng(seed);
  NetworkBuilder b;
  std::vector<std::string> ids;
  for (int i = 0; i < nodes; ++i) ids.push_back("n" + std::to_string(i));
  b.declare_nodes(ids);
  const std::size_t edges =
      static_cast<std::size_t>(nodes * degree_target / 2);
  std::size_t added = 0;
  std::set<std::pair<int, int>> seen;
  while (added < edges) {
    int a = static_cast<int>(rng.uniform_below(nodes));
    int c = static_cast<int>(rng.uniform_below(nodes));
    if (a == c) continue;
    auto key = std::minmax(a, c);
    if (!seen.insert({key.first, key.second}).second) continue;
    b.add_edge(ids[key.first], ids[key.second], 0.5 + rng.uniform01(), "bench");
    ++added;
  }
  return b.build();
}

}  // namespace

static void BM_TopologicalFeatures(benchmark::State& state) {
  Network net = random_graph(static_cast<int>(state.range(0)), 8.0, 5);
  for (auto _ : state) {
    NodeFeatureTable t = topological_features(net);
    benchmark::DoNotOptimize(t);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TopologicalFeatures)->RangeMultiplier(2)->Range(64, 1024);

static void BM_GenerateWalks(benchmark::State& state) {
  Network net = random_graph(static_cast<int>(state.range(0)), 8.0, 9);
  WalkConfig cfg;
  cfg.walk_length = 30;
  cfg.walks_per_node = 5;
  cfg.p = 0.5;
  cfg.q = 2.0;
  for (auto _ : state) {
    auto walks = generate_walks(net, cfg);
    benchmark::DoNotOptimize(walks);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 5 * 30);
}
BENCHMARK(BM_GenerateWalks)->RangeMultiplier(2)->Range(64, 1024);

static void BM_NeighborhoodRatio(benchmark::State& state) {
  Network net = random_graph(static_cast<int>(state.range(0)), 8.0, 3);
  AnnotationMap closed;
  Rng rng(4);
  for (std::size_t v = 0; v < net.node_count(); ++v)
    if (rng.uniform01() < 0.3)
      closed.add(net.node_id(static_cast<NodeId>(v)), "C");
  closed.add(net.node_id(0), "C");
  for (auto _ : state) {
    auto ratios = neighborhood_class_ratio(net, closed, "C");
    benchmark::DoNotOptimize(ratios);
  }
}
BENCHMARK(BM_NeighborhoodRatio)->RangeMultiplier(4)->Range(256, 4096);
