#include <cmath>
#include <filesystem>
#include <set>
#include <unordered_set>

#include "doctest.h"
#include "hmc/network.hpp"
#include "hmc/random.hpp"
#include "support/synthetic.hpp"

using namespace hmc;
namespace ts = hmc::testsupport;

TEST_CASE("load_network builds a minimal graph") {
  Network net = load_network({{"a", "b", 1.0}});
  CHECK(net.node_count() == 2);
  CHECK(net.edge_count() == 1);
  CHECK(net.node_id(0) == "a");  // first-appearance order
  CHECK(net.node_id(1) == "b");
  CHECK(net.has_edge(0, 1));
}

TEST_CASE("load_network rejects duplicate unordered pairs") {
  CHECK_THROWS_WITH_AS(load_network({{"a", "b", 1.0}, {"b", "a", 1.0}}),
                       doctest::Contains("duplicate unordered pair"),
                       InputError);
  CHECK_THROWS_WITH_AS(load_network({{"a", "b", 1.0}, {"a", "b", 2.0}}),
                       doctest::Contains("conflicting weight"), InputError);
}

TEST_CASE("load_network rejects self-loops naming the record") {
  CHECK_THROWS_WITH_AS(load_network({{"a", "b", 1.0}, {"c", "c", 1.0}}),
                       doctest::Contains("record 2"), InputError);
}

TEST_CASE("load_network rejects negative weights") {
  CHECK_THROWS_AS(load_network({{"a", "b", -0.5}}), InputError);
}

TEST_CASE("node list admits isolated nodes and pins the universe") {
  std::vector<std::string> nodes = {"x", "a", "b"};
  Network net = load_network({{"a", "b", 1.0}}, &nodes);
  CHECK(net.node_count() == 3);
  CHECK(net.degree(net.require("x")) == 0);
  CHECK_THROWS_WITH_AS(load_network({{"a", "z", 1.0}}, &nodes),
                       doctest::Contains("not a declared node"), InputError);
}

TEST_CASE("edge list file: tabs, comments, strict parsing") {
  std::string dir = ts::make_temp_dir("net");
  write_text_file(dir + "/edges.tsv",
                  "# comment line\na\tb\t1.5\nb\tc\t0.25\n\n");
  Network net = load_network_file(dir + "/edges.tsv");
  CHECK(net.node_count() == 3);
  CHECK(net.edge_count() == 2);
  CHECK(net.neighbors(net.require("a"))[0].second == 1.5);

  write_text_file(dir + "/bad.tsv", "a\tb\tnot_a_number\n");
  CHECK_THROWS_AS(load_network_file(dir + "/bad.tsv"), InputError);
}

TEST_CASE("topological features on a 3-node path") {
  Network net = load_network({{"a", "b", 1.0}, {"b", "c", 1.0}});
  NodeFeatureTable t = topological_features(net);
  CHECK(t.rows[net.require("b")].eccentricity == 1);
  CHECK(t.rows[net.require("a")].eccentricity == 2);
  CHECK(t.rows[net.require("c")].eccentricity == 2);
  CHECK(t.rows[net.require("b")].degree == 2);
  CHECK(t.rows[net.require("b")].degree_centrality == doctest::Approx(1.0));
}

TEST_CASE("topological features on a triangle") {
  Network net =
      load_network({{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", 1.0}});
  NodeFeatureTable t = topological_features(net);
  for (NodeId v = 0; v < 3; ++v) {
    CHECK(t.rows[v].degree == 2);
    CHECK(t.rows[v].average_neighbor_degree == 2);
    CHECK(t.rows[v].clustering_coefficient == 1.0);
    CHECK(t.rows[v].eccentricity == 1);
  }
}

TEST_CASE("average neighbor degree on a 4-leaf star") {
  // Hand computation, cross-checked by brute force over the adjacency list.
  Network net = load_network(
      {{"c", "l1", 1.0}, {"c", "l2", 1.0}, {"c", "l3", 1.0}, {"c", "l4", 1.0}});
  NodeFeatureTable t = topological_features(net);
  NodeId c = net.require("c");
  CHECK(t.rows[c].average_neighbor_degree == 1.0);
  for (const char* leaf : {"l1", "l2", "l3", "l4"})
    CHECK(t.rows[net.require(leaf)].average_neighbor_degree == 4.0);

  double brute = 0;
  for (const auto& [u, w] : net.neighbors(c)) brute += net.degree(u);
  brute /= net.degree(c);
  CHECK(t.rows[c].average_neighbor_degree == brute);
}

TEST_CASE("average neighbor degree matches brute force on random graphs") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Network net =
        ts::random_network(50 + 50 * static_cast<int>(seed), 0.05, seed);
    NodeFeatureTable t = topological_features(net);
    for (NodeId v = 0; v < net.node_count(); ++v) {
      double brute = 0;
      for (const auto& [u, w] : net.neighbors(v)) brute += net.degree(u);
      if (net.degree(v) > 0) brute /= net.degree(v);
      CHECK(t.rows[v].average_neighbor_degree == brute);  // exact
    }
  }
}

TEST_CASE("eccentricity differs by at most one across an edge") {
  Network net = ts::random_network(120, 0.04, 77);
  NodeFeatureTable t = topological_features(net);
  for (NodeId v = 0; v < net.node_count(); ++v)
    for (const auto& [u, w] : net.neighbors(v))
      CHECK(t.rows[v].eccentricity >= t.rows[u].eccentricity - 1);
}

TEST_CASE("closeness and degree centrality stay in [0,1]") {
  Network net = ts::random_network(80, 0.03, 5);
  NodeFeatureTable t = topological_features(net);
  for (NodeId v = 0; v < net.node_count(); ++v) {
    CHECK(t.rows[v].closeness_centrality >= 0.0);
    CHECK(t.rows[v].closeness_centrality <= 1.0);
    CHECK(t.rows[v].degree_centrality >= 0.0);
    CHECK(t.rows[v].degree_centrality <= 1.0);
    CHECK(std::isfinite(t.rows[v].average_neighbor_degree));
  }
}

TEST_CASE("neighborhood class ratio counts annotated neighbors") {
  Network net = load_network(
      {{"v", "a", 1.0}, {"v", "b", 1.0}, {"v", "c", 1.0}, {"v", "d", 1.0}});
  NodeId v = net.require("v");

  AnnotationMap all;
  for (const char* n : {"a", "b", "c", "d"}) all.add(n, "C");
  CHECK(neighborhood_class_ratio(net, all, "C")[v] == 1.0);

  // Class known elsewhere, none of v's neighbors annotated.
  Network net2 = load_network({{"v", "a", 1.0},
                               {"v", "b", 1.0},
                               {"v", "c", 1.0},
                               {"v", "d", 1.0},
                               {"far", "a", 1.0}});
  AnnotationMap none;
  none.add("far", "C");
  CHECK(neighborhood_class_ratio(net2, none, "C")[net2.require("v")] == 0.0);

  AnnotationMap half;
  half.add("a", "C");
  half.add("b", "C");
  CHECK(neighborhood_class_ratio(net, half, "C")[v] == 0.5);
}

TEST_CASE("neighborhood class ratio rejects unknown classes") {
  Network net = load_network({{"a", "b", 1.0}});
  AnnotationMap m;
  m.add("a", "C");
  CHECK_THROWS_WITH_AS(neighborhood_class_ratio(net, m, "missing"),
                       doctest::Contains("missing"), std::invalid_argument);
}

TEST_CASE("class ratio is complementary and degree-0 nodes give 0") {
  Network net = ts::random_network(60, 0.06, 11);
  AnnotationMap in_cls;
  AnnotationMap out_cls;
  Rng rng(3);
  for (NodeId v = 0; v < net.node_count(); ++v)
    (rng.uniform01() < 0.4 ? in_cls : out_cls).add(net.node_id(v), "C");
  auto r_in = neighborhood_class_ratio(net, in_cls, "C");
  auto r_out = neighborhood_class_ratio(net, out_cls, "C");
  for (NodeId v = 0; v < net.node_count(); ++v) {
    CHECK(r_in[v] >= 0.0);
    CHECK(r_in[v] <= 1.0);
    if (net.degree(v) == 0) {
      CHECK(r_in[v] == 0.0);
    } else {
      CHECK(r_in[v] + r_out[v] == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("case-study-scale edge file loads with exact counts") {
  // 550,813 unique pairs over 19,663 nodes, the case-study shape.
  const int n = 19663;
  const std::size_t m = 550813;
  std::string dir = ts::make_temp_dir("scale");
  std::string path = dir + "/big_edges.tsv";
  {
    std::string buf;
    buf.reserve(m * 18);
    auto name = [](int i) {
      char b[16];
      std::snprintf(b, sizeof(b), "g%05d", i);
      return std::string(b);
    };
    std::unordered_set<std::uint64_t> seen;
    std::size_t written = 0;
    for (int i = 0; i + 1 < n && written < m; ++i) {
      seen.insert((static_cast<std::uint64_t>(i) << 32) |
                  static_cast<std::uint64_t>(i + 1));
      buf += name(i) + "\t" + name(i + 1) + "\t1\n";
      ++written;
    }
    Rng rng(123);
    while (written < m) {
      int a = static_cast<int>(rng.uniform_below(n));
      int b = static_cast<int>(rng.uniform_below(n));
      if (a == b) continue;
      int lo = std::min(a, b);
      int hi = std::max(a, b);
      std::uint64_t key =
          (static_cast<std::uint64_t>(lo) << 32) | static_cast<std::uint64_t>(hi);
      if (!seen.insert(key).second) continue;
      buf += name(lo) + "\t" + name(hi) + "\t1\n";
      ++written;
    }
    write_text_file(path, buf);
  }
  Network net = load_network_file(path);
  CHECK(net.node_count() == 19663);
  CHECK(net.edge_count() == 550813);
  std::filesystem::remove_all(dir);
}
