#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hmc/annotations.hpp"
#include "hmc/hierarchy.hpp"
#include "hmc/network.hpp"

namespace hmc {

// Parameters of the Bayes-binomial neighborhood baseline, per class:
//   p1 — probability a neighbor carries the class given the node does,
//   p0 — the same given the node does not (both add-one smoothed),
//   prior — P(C | parent(C)); the root uses prevalence over the graph.
struct HbnClassParams {
  double p1 = 0.5;
  double p0 = 0.5;
  double prior = 0.0;
  std::vector<NodeId> extent;  // annotated node indices, sorted
};

struct HbnParams {
  std::map<std::string, HbnClassParams> by_class;
};

// Fits on the given network and (possibly masked) annotation map; the tree is
// the normalized class tree the scores will be multiplied along.
HbnParams fit_hbn(const Network& net, const AnnotationMap& closed,
                  const TreeHierarchy& tree);

// Posterior for node/class multiplied down the root-to-class path:
//   posterior = pi * B(k; n, p1) / (pi * B(k; n, p1) + (1 - pi) * B(k; n, p0))
// with n = deg(v) and k the annotated-neighbor count; binomial likelihoods in
// log space. Degree-0 nodes reduce to the prior chain product.
double predict_hbn(const HbnParams& params, const Network& net,
                   const TreeHierarchy& tree, NodeId node,
                   const std::string& cls);

// Scores for every (row, class) of a sub-hierarchy using the engine's fold
// assignment per class; annotations of held-out nodes are masked during
// fitting so no test information reaches the parameters. Returned vectors are
// aligned with sub.row_nodes.
std::map<std::string, std::vector<double>> hbn_out_of_fold_scores(
    const SubHierarchy& sub, const AnnotationMap& closed, int k,
    std::uint64_t master_seed);

}  // namespace hmc
