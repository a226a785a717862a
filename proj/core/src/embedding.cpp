#include "hmc/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hmc/random.hpp"

namespace hmc {

namespace {

double stable_log_sigmoid(double s) {
  // log(sigmoid(s)) without overflow.
  if (s >= 0) return -std::log1p(std::exp(-s));
  return s - std::log1p(std::exp(s));
}

double sigmoid(double s) {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  double e = std::exp(s);
  return e / (1.0 + e);
}

double dot(const double* a, const double* b, int dim) {
  double s = 0;
  for (int i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<double> transition_probabilities(const Network& net, int prev,
                                             NodeId cur, double p, double q) {
  if (p <= 0 || q <= 0) throw std::invalid_argument("p and q must be positive");
  const auto& adj = net.neighbors(cur);
  std::vector<double> weights(adj.size(), 0.0);
  double total = 0;
  for (std::size_t i = 0; i < adj.size(); ++i) {
    const auto& [x, f] = adj[i];
    double alpha;
    if (prev < 0)
      alpha = 1.0;  // first step: edge weight only
    else if (x == static_cast<NodeId>(prev))
      alpha = 1.0 / p;
    else if (net.has_edge(static_cast<NodeId>(prev), x))
      alpha = 1.0;
    else
      alpha = 1.0 / q;
    weights[i] = f * alpha;
    total += weights[i];
  }
  if (total <= 0)
    throw std::invalid_argument("no usable transition out of node " +
                                net.node_id(cur));
  for (double& w : weights) w /= total;
  return weights;
}

std::vector<std::vector<NodeId>> generate_walks(const Network& net,
                                                const WalkConfig& cfg) {
  if (cfg.p <= 0 || cfg.q <= 0) throw std::invalid_argument("p and q must be positive");
  if (cfg.walk_length < 2) throw std::invalid_argument("walk_length must be >= 2");
  if (cfg.walks_per_node < 1)
    throw std::invalid_argument("walks_per_node must be >= 1");
  if (net.edge_count() == 0)
    throw std::invalid_argument("cannot walk an edgeless network");

  std::vector<std::vector<NodeId>> walks;
  walks.reserve(net.node_count() * static_cast<std::size_t>(cfg.walks_per_node));
  for (NodeId start = 0; start < net.node_count(); ++start) {
    if (net.degree(start) == 0) continue;
    for (int w = 0; w < cfg.walks_per_node; ++w) {
      Rng rng(derive_seed(cfg.seed, "walk", start, static_cast<std::uint64_t>(w)));
      std::vector<NodeId> walk;
      walk.reserve(cfg.walk_length);
      walk.push_back(start);
      int prev = -1;
      NodeId cur = start;
      while (static_cast<int>(walk.size()) < cfg.walk_length) {
        const auto& adj = net.neighbors(cur);
        if (adj.empty()) break;  // dead end: truncate
        auto probs = transition_probabilities(net, prev, cur, cfg.p, cfg.q);
        double r = rng.uniform01();
        double acc = 0;
        std::size_t chosen = adj.size() - 1;
        for (std::size_t i = 0; i < probs.size(); ++i) {
          acc += probs[i];
          if (r < acc) {
            chosen = i;
            break;
          }
        }
        prev = static_cast<int>(cur);
        cur = adj[chosen].first;
        walk.push_back(cur);
      }
      walks.push_back(std::move(walk));
    }
  }
  return walks;
}

const double* EmbeddingMatrix::vec(const std::string& id) const {
  auto it = index.find(id);
  if (it == index.end())
    throw std::invalid_argument("node '" + id + "' missing from embedding table");
  return vectors.row(it->second);
}

double sgns_example_loss(const Matrix& in_vecs, const Matrix& out_vecs,
                         std::size_t center, std::size_t context,
                         const std::vector<std::size_t>& negatives) {
  const int dim = static_cast<int>(in_vecs.cols);
  double loss = -stable_log_sigmoid(dot(in_vecs.row(center), out_vecs.row(context), dim));
  for (std::size_t n : negatives)
    loss -= stable_log_sigmoid(-dot(in_vecs.row(center), out_vecs.row(n), dim));
  return loss;
}

void sgns_example_gradient(const Matrix& in_vecs, const Matrix& out_vecs,
                           std::size_t center, std::size_t context,
                           const std::vector<std::size_t>& negatives,
                           std::vector<double>& g_center,
                           std::vector<double>& g_context,
                           std::vector<std::vector<double>>& g_negatives) {
  const int dim = static_cast<int>(in_vecs.cols);
  const double* v = in_vecs.row(center);
  g_center.assign(dim, 0.0);
  g_context.assign(dim, 0.0);
  g_negatives.assign(negatives.size(), std::vector<double>(dim, 0.0));

  const double* u_ctx = out_vecs.row(context);
  double e_pos = sigmoid(dot(v, u_ctx, dim)) - 1.0;
  for (int d = 0; d < dim; ++d) {
    g_center[d] += e_pos * u_ctx[d];
    g_context[d] = e_pos * v[d];
  }
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    const double* u_neg = out_vecs.row(negatives[i]);
    double e_neg = sigmoid(dot(v, u_neg, dim));
    for (int d = 0; d < dim; ++d) {
      g_center[d] += e_neg * u_neg[d];
      g_negatives[i][d] = e_neg * v[d];
    }
  }
}

EmbeddingMatrix train_embeddings(const std::vector<std::vector<NodeId>>& walks,
                                 const Network& net, const EmbeddingConfig& cfg,
                                 SgnsStats* stats) {
  if (cfg.dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  if (cfg.window < 1) throw std::invalid_argument("window must be >= 1");
  if (cfg.negative_samples < 1)
    throw std::invalid_argument("negative_samples must be >= 1");
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (walks.empty()) throw std::invalid_argument("empty walk corpus");

  const std::size_t n = net.node_count();
  const int dim = cfg.dimension;

  // Unigram counts over the corpus, raised to 0.75 for negative sampling.
  std::vector<double> freq(n, 0.0);
  std::size_t tokens = 0;
  for (const auto& walk : walks)
    for (NodeId v : walk) {
      freq[v] += 1.0;
      ++tokens;
    }
  std::vector<double> cumulative(n, 0.0);
  double acc = 0;
  for (std::size_t v = 0; v < n; ++v) {
    acc += std::pow(freq[v], 0.75);
    cumulative[v] = acc;
  }
  if (acc <= 0) throw std::invalid_argument("walk corpus visits no node");

  EmbeddingMatrix emb;
  emb.dimension = dim;
  emb.node_ids = net.node_ids();
  for (std::size_t v = 0; v < n; ++v) emb.index.emplace(emb.node_ids[v], v);
  emb.vectors = Matrix(n, dim);
  Matrix out_vecs(n, dim);

  Rng init_rng(derive_seed(cfg.seed, "sgns-init"));
  for (double& w : emb.vectors.data)
    w = (init_rng.uniform01() - 0.5) / static_cast<double>(dim);

  auto sample_negative = [&](Rng& rng) {
    double r = rng.uniform01() * acc;
    auto it = std::lower_bound(cumulative.begin(), cumulative.end(), r);
    return static_cast<std::size_t>(it - cumulative.begin());
  };

  const std::size_t pairs_per_epoch = [&] {
    std::size_t count = 0;
    for (const auto& walk : walks) {
      const int len = static_cast<int>(walk.size());
      for (int i = 0; i < len; ++i) {
        int lo = std::max(0, i - cfg.window);
        int hi = std::min(len - 1, i + cfg.window);
        count += static_cast<std::size_t>(hi - lo);
      }
    }
    return count;
  }();
  const std::size_t total_steps =
      pairs_per_epoch * static_cast<std::size_t>(cfg.epochs);
  std::size_t step = 0;

  // One (center, context) update; grad buffer supplied per worker.
  auto train_pair = [&](std::size_t center, std::size_t context, double lr,
                        Rng& rng, std::vector<double>& g_center,
                        double& loss_sum) {
    double* v = emb.vectors.row(center);
    std::fill(g_center.begin(), g_center.end(), 0.0);

    double* u_ctx = out_vecs.row(context);
    double s_pos = dot(v, u_ctx, dim);
    loss_sum += -stable_log_sigmoid(s_pos);
    double e_pos = sigmoid(s_pos) - 1.0;
    for (int d = 0; d < dim; ++d) {
      g_center[d] += e_pos * u_ctx[d];
      u_ctx[d] -= lr * e_pos * v[d];
    }

    // Negatives; a draw equal to the context is retried a few times.
    for (int k = 0; k < cfg.negative_samples; ++k) {
      std::size_t neg = sample_negative(rng);
      for (int retry = 0; retry < 3 && neg == context; ++retry)
        neg = sample_negative(rng);
      if (neg == context) continue;
      double* u_neg = out_vecs.row(neg);
      double s_neg = dot(v, u_neg, dim);
      loss_sum += -stable_log_sigmoid(-s_neg);
      double e_neg = sigmoid(s_neg);
      for (int d = 0; d < dim; ++d) {
        g_center[d] += e_neg * u_neg[d];
        u_neg[d] -= lr * e_neg * v[d];
      }
    }
    for (int d = 0; d < dim; ++d) v[d] -= lr * g_center[d];
  };

  auto lr_at = [&](std::size_t at_step) {
    double lr = cfg.learning_rate *
                std::max(1.0 - static_cast<double>(at_step) /
                                   static_cast<double>(total_steps),
                         0.0);
    return std::max(lr, 1e-4);
  };

  if (cfg.threads <= 1) {
    std::vector<double> g_center(dim);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      Rng rng(derive_seed(cfg.seed, "sgns-epoch",
                          static_cast<std::uint64_t>(epoch)));
      double loss_sum = 0;
      std::size_t loss_count = 0;
      for (const auto& walk : walks) {
        const int len = static_cast<int>(walk.size());
        for (int i = 0; i < len; ++i) {
          int lo = std::max(0, i - cfg.window);
          int hi = std::min(len - 1, i + cfg.window);
          for (int j = lo; j <= hi; ++j) {
            if (j == i) continue;
            train_pair(walk[i], walk[j], lr_at(step), rng, g_center, loss_sum);
            ++step;
            ++loss_count;
          }
        }
      }
      if (stats != nullptr)
        stats->epoch_loss.push_back(loss_count ? loss_sum / loss_count : 0.0);
    }
  } else {
    // Opt-in concurrent mode: walk shards update shared vectors without
    // locks, giving up bit-reproducibility.
    const int workers = std::min<int>(cfg.threads,
                                      static_cast<int>(walks.size()));
    std::atomic<std::size_t> shared_step{0};
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::vector<double> loss_sums(workers, 0.0);
      std::vector<std::size_t> loss_counts(workers, 0);
      std::vector<std::thread> pool;
      for (int t = 0; t < workers; ++t)
        pool.emplace_back([&, t] {
          Rng rng(derive_seed(cfg.seed, "sgns-shard",
                              static_cast<std::uint64_t>(epoch),
                              static_cast<std::uint64_t>(t)));
          std::vector<double> g_center(dim);
          for (std::size_t w = t; w < walks.size();
               w += static_cast<std::size_t>(workers)) {
            const auto& walk = walks[w];
            const int len = static_cast<int>(walk.size());
            for (int i = 0; i < len; ++i) {
              int lo = std::max(0, i - cfg.window);
              int hi = std::min(len - 1, i + cfg.window);
              for (int j = lo; j <= hi; ++j) {
                if (j == i) continue;
                std::size_t s = shared_step.fetch_add(1, std::memory_order_relaxed);
                train_pair(walk[i], walk[j], lr_at(s), rng, g_center,
                           loss_sums[t]);
                ++loss_counts[t];
              }
            }
          }
        });
      for (auto& th : pool) th.join();
      if (stats != nullptr) {
        double loss_sum = 0;
        std::size_t loss_count = 0;
        for (int t = 0; t < workers; ++t) {
          loss_sum += loss_sums[t];
          loss_count += loss_counts[t];
        }
        stats->epoch_loss.push_back(loss_count ? loss_sum / loss_count : 0.0);
      }
    }
  }
  (void)tokens;
  return emb;
}

double cosine_similarity(const double* a, const double* b, int dim) {
  double ab = 0;
  double aa = 0;
  double bb = 0;
  for (int i = 0; i < dim; ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0 || bb == 0) return 0.0;
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

void save_embeddings(const EmbeddingMatrix& emb, const std::string& path,
                     std::uint64_t config_hash) {
  std::string out = "# dimension=" + std::to_string(emb.dimension) +
                    " config=" + to_hex(config_hash) + "\n";
  for (std::size_t i = 0; i < emb.node_ids.size(); ++i) {
    out += emb.node_ids[i];
    const double* row = emb.vectors.row(i);
    for (int d = 0; d < emb.dimension; ++d) out += "\t" + format_double(row[d]);
    out += "\n";
  }
  write_text_file(path, out);
}

EmbeddingMatrix load_embeddings(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("# dimension=", 0) != 0)
    throw InputError(path + ": missing embedding header");
  const std::string header = line.substr(std::string("# dimension=").size());
  int dim = static_cast<int>(parse_int(split(header, ' ')[0], path));

  EmbeddingMatrix emb;
  emb.dimension = dim;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (static_cast<int>(fields.size()) != dim + 1)
      throw InputError(path + ": row with wrong dimension: '" + line + "'");
    emb.index.emplace(fields[0], emb.node_ids.size());
    emb.node_ids.push_back(fields[0]);
    std::vector<double> v(dim);
    for (int d = 0; d < dim; ++d) v[d] = parse_double(fields[d + 1], path);
    rows.push_back(std::move(v));
  }
  emb.vectors = Matrix(rows.size(), dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].begin(), rows[i].end(), emb.vectors.row(i));
  return emb;
}

}  // namespace hmc
