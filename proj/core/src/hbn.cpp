#include "hmc/hbn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hmc/engine.hpp"
#include "hmc/resample.hpp"

namespace hmc {

namespace {

std::vector<NodeId> extent_indices(const Network& net,
                                   const AnnotationMap& closed,
                                   const std::string& cls) {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < net.node_count(); ++v)
    if (closed.has(net.node_id(v), cls)) out.push_back(v);
  return out;  // ascending by construction
}

bool in_extent(const std::vector<NodeId>& extent, NodeId v) {
  return std::binary_search(extent.begin(), extent.end(), v);
}

HbnClassParams fit_class(const Network& net, const std::vector<NodeId>& extent,
                         double prior) {
  HbnClassParams params;
  params.extent = extent;
  params.prior = prior;

  std::vector<char> member(net.node_count(), 0);
  for (NodeId v : extent) member[v] = 1;

  std::int64_t hits1 = 0;
  std::int64_t total1 = 0;
  std::int64_t hits0 = 0;
  std::int64_t total0 = 0;
  for (NodeId v = 0; v < net.node_count(); ++v) {
    std::int64_t hits = 0;
    for (const auto& [u, w] : net.neighbors(v)) {
      (void)w;
      if (member[u]) ++hits;
    }
    if (member[v]) {
      hits1 += hits;
      total1 += static_cast<std::int64_t>(net.degree(v));
    } else {
      hits0 += hits;
      total0 += static_cast<std::int64_t>(net.degree(v));
    }
  }
  params.p1 = static_cast<double>(hits1 + 1) / static_cast<double>(total1 + 2);
  params.p0 = static_cast<double>(hits0 + 1) / static_cast<double>(total0 + 2);
  return params;
}

double posterior(const HbnClassParams& c, std::int64_t n, std::int64_t k) {
  if (c.prior <= 0.0) return 0.0;
  if (c.prior >= 1.0) return 1.0;
  // The binomial coefficient cancels between numerator and denominator.
  double log_l1 = k * std::log(c.p1) + (n - k) * std::log1p(-c.p1);
  double log_l0 = k * std::log(c.p0) + (n - k) * std::log1p(-c.p0);
  double delta = std::log1p(-c.prior) - std::log(c.prior) + log_l0 - log_l1;
  // posterior = 1 / (1 + exp(delta))
  if (delta >= 0) {
    double e = std::exp(-delta);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(delta));
}

}  // namespace

HbnParams fit_hbn(const Network& net, const AnnotationMap& closed,
                  const TreeHierarchy& tree) {
  HbnParams params;
  for (int idx : tree.topological_order()) {
    const std::string& cls = tree.class_ids[idx];
    auto extent = extent_indices(net, closed, cls);
    double prior;
    int parent = tree.parent[idx];
    if (parent < 0) {
      prior = net.node_count() == 0
                  ? 0.0
                  : static_cast<double>(extent.size()) /
                        static_cast<double>(net.node_count());
    } else {
      const auto& parent_extent = params.by_class.at(tree.class_ids[parent]).extent;
      if (parent_extent.empty())
        throw std::invalid_argument("class '" + cls +
                                    "' has an unpopulated parent extent");
      prior = static_cast<double>(extent.size()) /
              static_cast<double>(parent_extent.size());
    }
    params.by_class.emplace(cls, fit_class(net, extent, prior));
  }
  return params;
}

double predict_hbn(const HbnParams& params, const Network& net,
                   const TreeHierarchy& tree, NodeId node,
                   const std::string& cls) {
  int idx = tree.require(cls);
  // Path from root down to cls.
  std::vector<int> path;
  for (int v = idx; v >= 0; v = tree.parent[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());

  const std::int64_t n = static_cast<std::int64_t>(net.degree(node));
  double score = 1.0;
  for (int v : path) {
    const auto& c = params.by_class.at(tree.class_ids[v]);
    std::int64_t k = 0;
    for (const auto& [u, w] : net.neighbors(node)) {
      (void)w;
      if (in_extent(c.extent, u)) ++k;
    }
    score *= posterior(c, n, k);
    if (score == 0.0) break;
  }
  return score;
}

std::map<std::string, std::vector<double>> hbn_out_of_fold_scores(
    const SubHierarchy& sub, const AnnotationMap& closed, int k,
    std::uint64_t master_seed) {
  const std::size_t n_rows = sub.row_nodes.size();
  std::map<std::string, std::vector<double>> scores;
  std::map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < n_rows; ++r) row_of[sub.row_nodes[r]] = r;

  for (const auto& cls : sub.classes) {
    if (sub.targets.count(cls) == 0) continue;
    std::vector<int> labels(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r)
      labels[r] = closed.has(sub.row_nodes[r], cls) ? 1 : 0;
    std::int64_t pos = std::count(labels.begin(), labels.end(), 1);
    std::int64_t neg = static_cast<std::int64_t>(n_rows) - pos;

    std::vector<double> s(n_rows, 1.0);
    if (pos < k || neg < k) {
      // Mirrors the engine's handling: too few positives means no protocol at
      // all; too few negatives means membership is (near) certain here.
      if (pos < k) continue;
      scores.emplace(cls, std::move(s));
      continue;
    }

    int cls_idx = sub.tree.require(cls);
    std::vector<int> path;
    for (int v = cls_idx; v >= 0; v = sub.tree.parent[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());

    FoldAssignment folds =
        stratified_kfold(labels, k, fold_seed_for(master_seed, sub.root, cls));
    for (int f = 0; f < k; ++f) {
      // Mask every held-out node's annotations while fitting. Only the
      // root-to-class path is fitted; each path class is an ancestor of the
      // target, so its visible extent stays populated.
      AnnotationMap visible;
      std::vector<char> hidden(n_rows, 0);
      for (std::size_t r = 0; r < n_rows; ++r)
        if (folds.fold[r] == f) hidden[r] = 1;
      for (const auto& [node, node_classes] : closed.by_node()) {
        auto it = row_of.find(node);
        if (it != row_of.end() && hidden[it->second]) continue;
        for (const auto& c : node_classes) visible.add(node, c);
      }

      HbnParams params;
      const std::vector<NodeId>* parent_extent = nullptr;
      for (int v : path) {
        const std::string& path_cls = sub.tree.class_ids[v];
        auto extent = extent_indices(sub.subgraph, visible, path_cls);
        double prior;
        if (parent_extent == nullptr) {
          prior = static_cast<double>(extent.size()) /
                  static_cast<double>(sub.subgraph.node_count());
        } else {
          if (parent_extent->empty())
            throw std::invalid_argument("class '" + path_cls +
                                        "' has an unpopulated parent extent");
          prior = static_cast<double>(extent.size()) /
                  static_cast<double>(parent_extent->size());
        }
        auto [it, ok] =
            params.by_class.emplace(path_cls, fit_class(sub.subgraph, extent, prior));
        (void)ok;
        parent_extent = &it->second.extent;
      }
      for (std::size_t r = 0; r < n_rows; ++r) {
        if (folds.fold[r] != f) continue;
        NodeId v = sub.subgraph.require(sub.row_nodes[r]);
        s[r] = predict_hbn(params, sub.subgraph, sub.tree, v, cls);
      }
    }
    scores.emplace(cls, std::move(s));
  }
  return scores;
}

}  // namespace hmc
