#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hmc/annotations.hpp"
#include "hmc/util.hpp"

namespace hmc {

using NodeId = std::uint32_t;

struct EdgeRecord {
  std::string a;
  std::string b;
  double weight = 1.0;
};

// Undirected weighted graph over opaque string identifiers mapped to dense
// indices in first-appearance order. Immutable after construction.
class Network {
 public:
  std::size_t node_count() const { return ids_.size(); }
  std::size_t edge_count() const { return edges_; }

  const std::string& node_id(NodeId v) const { return ids_[v]; }
  const std::vector<std::string>& node_ids() const { return ids_; }
  std::optional<NodeId> find(const std::string& id) const;
  NodeId require(const std::string& id) const;

  // Sorted by neighbor index.
  const std::vector<std::pair<NodeId, double>>& neighbors(NodeId v) const {
    return adj_[v];
  }
  std::size_t degree(NodeId v) const { return adj_[v].size(); }
  bool has_edge(NodeId a, NodeId b) const;

  friend class NetworkBuilder;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<std::vector<std::pair<NodeId, double>>> adj_;
  std::size_t edges_ = 0;
};

class NetworkBuilder {
 public:
  // When a node list is supplied, edge endpoints must already be declared.
  void declare_nodes(const std::vector<std::string>& ids);
  void add_edge(const std::string& a, const std::string& b, double weight,
                const std::string& context);
  Network build();

 private:
  NodeId intern(const std::string& id, const std::string& context);

  Network net_;
  std::unordered_map<std::uint64_t, double> seen_pairs_;
  bool declared_only_ = false;
};

Network load_network(const std::vector<EdgeRecord>& records,
                     const std::vector<std::string>* node_list = nullptr);

// Edge list file: UTF-8, tab-separated `node_a<TAB>node_b<TAB>weight`,
// '#' comment lines ignored. Optional node list: one identifier per line.
Network load_network_file(const std::string& edge_path,
                          const std::string& node_list_path = {});
void save_network_file(const Network& net, const std::string& path);

struct NodeFeatureRow {
  double degree = 0;
  double average_neighbor_degree = 0;
  double degree_centrality = 0;
  double closeness_centrality = 0;
  double eccentricity = 0;
  double clustering_coefficient = 0;
};

struct NodeFeatureTable {
  std::vector<NodeFeatureRow> rows;  // one per node, by dense index

  // Fixed column order; clustering_coefficient last so it can be toggled off.
  static const std::vector<std::string>& column_names();
  double value(NodeId v, std::size_t column) const;
};

NodeFeatureTable topological_features(const Network& net);

void save_features_file(const NodeFeatureTable& table, const Network& net,
                        const std::string& path);
NodeFeatureTable load_features_file(const std::string& path, const Network& net);

// For node v of degree d > 0: |{u in N(v) : cls in phi-hat(u)}| / d; 0 when
// d = 0. The class must appear in the annotation codomain.
std::vector<double> neighborhood_class_ratio(const Network& net,
                                             const AnnotationMap& closed,
                                             const std::string& cls);

}  // namespace hmc
