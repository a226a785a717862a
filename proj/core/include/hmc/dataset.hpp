#pragma once

#include <string>
#include <vector>

#include "hmc/annotations.hpp"
#include "hmc/embedding.hpp"
#include "hmc/hierarchy.hpp"
#include "hmc/network.hpp"
#include "hmc/util.hpp"

namespace hmc {

struct ClassDataset {
  std::string class_id;
  std::vector<std::string> node_ids;     // row order: sub-hierarchy canonical
  std::vector<std::string> column_names;
  Matrix X;
  std::vector<int> labels;               // 1 iff class in phi-hat(node)
  std::uint64_t schema_hash = 0;
  // Standardization parameters of the topological block, kept for reuse.
  std::vector<double> topo_mean;
  std::vector<double> topo_std;
};

// Feature sources for dataset assembly. `net` is the graph the features were
// computed on: the sub-hierarchy subgraph by default, the full network when
// candidates are widened.
struct FeatureBundle {
  const Network* net = nullptr;
  const NodeFeatureTable* features = nullptr;
  const EmbeddingMatrix* embeddings = nullptr;
  bool include_clustering = true;
};

// Columns: standardized topological block, embedding block, ratio_self,
// ratio_parent, parent_prediction. parent_predictions must be supplied for
// every class except the sub-hierarchy root, where the column is constant 1.
ClassDataset build_dataset(const SubHierarchy& sub, const FeatureBundle& fb,
                           const AnnotationMap& closed, const std::string& cls,
                           const std::vector<double>* parent_predictions);

void dump_dataset_tsv(const ClassDataset& ds, const std::string& path);

std::uint64_t schema_hash_of(const std::vector<std::string>& column_names);

}  // namespace hmc
