#include "hmc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hmc {

std::uint64_t schema_hash_of(const std::vector<std::string>& column_names) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const std::string sep(1, '\x1f');
  for (const auto& name : column_names) {
    h = fnv1a64(name, h);
    h = fnv1a64(sep, h);
  }
  return h;
}

ClassDataset build_dataset(const SubHierarchy& sub, const FeatureBundle& fb,
                           const AnnotationMap& closed, const std::string& cls,
                           const std::vector<double>* parent_predictions) {
  if (fb.net == nullptr || fb.features == nullptr || fb.embeddings == nullptr)
    throw std::invalid_argument("incomplete feature bundle");
  int local = sub.tree.index_of(cls);
  if (local < 0)
    throw std::invalid_argument("class '" + cls +
                                "' is not part of the sub-hierarchy");
  const bool is_root = cls == sub.root;
  if (is_root && parent_predictions != nullptr)
    throw std::invalid_argument("root class takes no parent predictions");
  if (!is_root && parent_predictions == nullptr)
    throw std::invalid_argument("parent predictions required for class '" +
                                cls + "'");
  if (!is_root && parent_predictions->size() != sub.row_nodes.size())
    throw std::invalid_argument("parent prediction vector length mismatch");

  const std::size_t n_rows = sub.row_nodes.size();
  const std::size_t topo_cols =
      NodeFeatureTable::column_names().size() - (fb.include_clustering ? 0 : 1);
  const int dim = fb.embeddings->dimension;

  ClassDataset ds;
  ds.class_id = cls;
  ds.node_ids = sub.row_nodes;
  for (std::size_t c = 0; c < topo_cols; ++c)
    ds.column_names.push_back(NodeFeatureTable::column_names()[c]);
  for (int d = 0; d < dim; ++d)
    ds.column_names.push_back("emb_" + std::to_string(d));
  ds.column_names.push_back("ratio_self");
  ds.column_names.push_back("ratio_parent");
  ds.column_names.push_back("parent_prediction");
  ds.schema_hash = schema_hash_of(ds.column_names);

  // Neighborhood ratios on the feature network.
  std::vector<double> ratio_self = neighborhood_class_ratio(*fb.net, closed, cls);
  std::vector<double> ratio_parent;
  if (!is_root) {
    const std::string& parent =
        sub.tree.class_ids[sub.tree.parent[local]];
    ratio_parent = neighborhood_class_ratio(*fb.net, closed, parent);
  }

  ds.X = Matrix(n_rows, topo_cols + dim + 3);
  ds.labels.resize(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::string& node = ds.node_ids[r];
    auto v = fb.net->find(node);
    if (!v || fb.features->rows.size() <= *v)
      throw std::invalid_argument("node '" + node +
                                  "' missing from feature table");
    double* row = ds.X.row(r);
    for (std::size_t c = 0; c < topo_cols; ++c)
      row[c] = fb.features->value(*v, c);
    const double* e = fb.embeddings->vec(node);  // throws naming the node
    for (int d = 0; d < dim; ++d) row[topo_cols + d] = e[d];
    row[topo_cols + dim] = ratio_self[*v];
    row[topo_cols + dim + 1] = is_root ? 1.0 : ratio_parent[*v];
    row[topo_cols + dim + 2] =
        is_root ? 1.0 : (*parent_predictions)[r];
    ds.labels[r] = closed.has(node, cls) ? 1 : 0;
  }

  // Standardize the topological block over the rows; embeddings and ratio
  // features stay raw.
  ds.topo_mean.assign(topo_cols, 0.0);
  ds.topo_std.assign(topo_cols, 0.0);
  for (std::size_t c = 0; c < topo_cols; ++c) {
    double mean = 0;
    for (std::size_t r = 0; r < n_rows; ++r) mean += ds.X.at(r, c);
    mean /= static_cast<double>(n_rows);
    double var = 0;
    for (std::size_t r = 0; r < n_rows; ++r) {
      double diff = ds.X.at(r, c) - mean;
      var += diff * diff;
    }
    double sd = std::sqrt(var / static_cast<double>(n_rows));
    ds.topo_mean[c] = mean;
    ds.topo_std[c] = sd;
    for (std::size_t r = 0; r < n_rows; ++r)
      ds.X.at(r, c) = sd > 0 ? (ds.X.at(r, c) - mean) / sd : 0.0;
  }
  return ds;
}

void dump_dataset_tsv(const ClassDataset& ds, const std::string& path) {
  std::string out = "node\tlabel";
  for (const auto& name : ds.column_names) out += "\t" + name;
  out += "\n";
  for (std::size_t r = 0; r < ds.X.rows; ++r) {
    out += ds.node_ids[r] + "\t" + std::to_string(ds.labels[r]);
    for (std::size_t c = 0; c < ds.X.cols; ++c)
      out += "\t" + format_double(ds.X.at(r, c));
    out += "\n";
  }
  write_text_file(path, out);
}

}  // namespace hmc
