#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "hmc/network.hpp"
#include "hmc/util.hpp"

namespace hmc {

struct WalkConfig {
  double p = 1.0;  // return parameter
  double q = 1.0;  // in-out parameter
  int walk_length = 30;
  int walks_per_node = 10;
  std::uint64_t seed = 0;
};

// Normalized second-order transition distribution out of state (prev, cur),
// aligned with net.neighbors(cur). prev < 0 means the first step, which is
// biased by edge weight alone.
std::vector<double> transition_probabilities(const Network& net, int prev,
                                             NodeId cur, double p, double q);

// walks_per_node walks from every non-isolated node. Distinct (seed, start,
// walk index) substreams keep the corpus independent of evaluation order.
std::vector<std::vector<NodeId>> generate_walks(const Network& net,
                                                const WalkConfig& cfg);

struct EmbeddingConfig {
  int dimension = 64;
  int window = 5;
  int negative_samples = 5;
  int epochs = 5;
  double learning_rate = 0.025;  // decays linearly to 1e-4
  std::uint64_t seed = 0;
  // 1 keeps a single logical stream and bit-reproducibility; more threads
  // shard the walk corpus with lock-free updates, trading that away.
  int threads = 1;
};

struct EmbeddingMatrix {
  int dimension = 0;
  std::vector<std::string> node_ids;
  std::unordered_map<std::string, std::size_t> index;
  Matrix vectors;  // input vectors, one row per node

  const double* vec(const std::string& id) const;
  bool has(const std::string& id) const { return index.count(id) > 0; }
};

struct SgnsStats {
  std::vector<double> epoch_loss;  // mean pair loss per epoch, pre-update
};

// Skip-gram with negative sampling over the walk corpus; negatives drawn from
// the unigram distribution raised to the 0.75 power. Single logical stream,
// deterministic under a fixed seed.
EmbeddingMatrix train_embeddings(const std::vector<std::vector<NodeId>>& walks,
                                 const Network& net, const EmbeddingConfig& cfg,
                                 SgnsStats* stats = nullptr);

// Loss and gradient of one (center, context, negatives) example; the trainer
// applies exactly these gradients, so finite differences can check them.
double sgns_example_loss(const Matrix& in_vecs, const Matrix& out_vecs,
                         std::size_t center, std::size_t context,
                         const std::vector<std::size_t>& negatives);
void sgns_example_gradient(const Matrix& in_vecs, const Matrix& out_vecs,
                           std::size_t center, std::size_t context,
                           const std::vector<std::size_t>& negatives,
                           std::vector<double>& g_center,
                           std::vector<double>& g_context,
                           std::vector<std::vector<double>>& g_negatives);

double cosine_similarity(const double* a, const double* b, int dim);

// `node<TAB>v1<TAB>...<TAB>vd` with a header recording dimension and the
// configuration hash.
void save_embeddings(const EmbeddingMatrix& emb, const std::string& path,
                     std::uint64_t config_hash);
EmbeddingMatrix load_embeddings(const std::string& path);

}  // namespace hmc
