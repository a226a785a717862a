#include "hmc/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hmc/metrics.hpp"
#include "hmc/random.hpp"

namespace hmc {

namespace {

constexpr double kProbFloor = 1e-15;
constexpr std::size_t kBatchSize = 32;

double sigmoid(double s) {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  double e = std::exp(s);
  return e / (1.0 + e);
}

double affine_score(const double* x, const std::vector<double>& w,
                    std::size_t cols) {
  double s = w[cols];  // bias
  for (std::size_t c = 0; c < cols; ++c) s += w[c] * x[c];
  return s;
}

void check_training_inputs(const Matrix& X, const std::vector<int>& y) {
  if (X.rows != y.size() || X.rows == 0)
    throw std::invalid_argument("feature matrix and labels disagree");
  std::int64_t pos = std::count(y.begin(), y.end(), 1);
  if (pos == 0 || pos == static_cast<std::int64_t>(y.size()))
    throw std::invalid_argument("degenerate labels: both classes required");
  for (double v : X.data)
    if (!std::isfinite(v))
      throw std::invalid_argument("non-finite feature value");
}

}  // namespace

double logistic_loss(const Matrix& X, const std::vector<int>& y,
                     const std::vector<double>& weights, double l2) {
  const std::size_t n = X.rows;
  double loss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double p = sigmoid(affine_score(X.row(i), weights, X.cols));
    p = std::clamp(p, kProbFloor, 1.0 - kProbFloor);
    loss += y[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  loss /= static_cast<double>(n);
  double reg = 0;
  for (std::size_t c = 0; c < X.cols; ++c) reg += weights[c] * weights[c];
  return loss + 0.5 * l2 * reg;
}

std::vector<double> logistic_gradient(const Matrix& X, const std::vector<int>& y,
                                      const std::vector<double>& weights,
                                      double l2) {
  const std::size_t n = X.rows;
  std::vector<double> g(X.cols + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = X.row(i);
    double err = sigmoid(affine_score(x, weights, X.cols)) - y[i];
    for (std::size_t c = 0; c < X.cols; ++c) g[c] += err * x[c];
    g[X.cols] += err;
  }
  for (double& v : g) v /= static_cast<double>(n);
  for (std::size_t c = 0; c < X.cols; ++c) g[c] += l2 * weights[c];
  return g;
}

TrainedModel train(const Matrix& X, const std::vector<int>& y,
                   const ClassifierConfig& cfg, std::uint64_t schema_hash) {
  if (cfg.kind != ClassifierKind::builtin_logistic)
    throw std::invalid_argument(
        "external classifiers run through the adapter contract, not train()");
  if (cfg.learning_rate <= 0) throw std::invalid_argument("learning_rate must be > 0");
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (cfg.l2_strength < 0) throw std::invalid_argument("l2_strength must be >= 0");
  check_training_inputs(X, y);

  TrainedModel model;
  model.schema_hash = schema_hash;
  model.config = cfg;
  model.weights.assign(X.cols + 1, 0.0);

  std::vector<std::size_t> order(X.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(cfg.seed, "logistic-sgd"));

  const std::size_t batches = (X.rows + kBatchSize - 1) / kBatchSize;
  const std::size_t total_steps = batches * static_cast<std::size_t>(cfg.epochs);
  std::size_t step = 0;
  std::vector<double> grad(X.cols + 1);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * kBatchSize;
      const std::size_t end = std::min(begin + kBatchSize, X.rows);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = begin; i < end; ++i) {
        const double* x = X.row(order[i]);
        double err =
            sigmoid(affine_score(x, model.weights, X.cols)) - y[order[i]];
        for (std::size_t c = 0; c < X.cols; ++c) grad[c] += err * x[c];
        grad[X.cols] += err;
      }
      const double inv = 1.0 / static_cast<double>(end - begin);
      double lr = cfg.learning_rate *
                  std::max(1.0 - static_cast<double>(step) /
                                     static_cast<double>(total_steps),
                           0.01);
      for (std::size_t c = 0; c < X.cols; ++c)
        model.weights[c] -=
            lr * (grad[c] * inv + cfg.l2_strength * model.weights[c]);
      model.weights[X.cols] -= lr * grad[X.cols] * inv;
      ++step;
    }
    model.epoch_loss.push_back(logistic_loss(X, y, model.weights, cfg.l2_strength));
  }
  for (double w : model.weights)
    if (!std::isfinite(w)) throw std::runtime_error("training diverged");
  return model;
}

std::vector<double> predict_proba(const TrainedModel& model, const Matrix& X,
                                  std::uint64_t schema_hash) {
  if (model.weights.size() != X.cols + 1)
    throw std::invalid_argument("feature count does not match the model");
  if (model.schema_hash != schema_hash)
    throw std::invalid_argument("feature schema hash mismatch");
  std::vector<double> out(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) {
    double p = sigmoid(affine_score(X.row(i), model.weights, X.cols));
    out[i] = std::clamp(p, kProbFloor, 1.0 - kProbFloor);
  }
  return out;
}

ClassifierConfig tune(const Matrix& X, const std::vector<int>& y,
                      const HyperGrid& grid, const FoldAssignment& folds,
                      const SmoteConfig* smote_cfg) {
  if (grid.candidates.empty()) throw std::invalid_argument("empty hyper grid");
  if (folds.fold.size() != X.rows)
    throw std::invalid_argument("fold assignment does not match the dataset");

  double best_score = -std::numeric_limits<double>::infinity();
  int best_index = -1;
  std::string last_error;

  for (std::size_t cand = 0; cand < grid.candidates.size(); ++cand) {
    const ClassifierConfig& cfg = grid.candidates[cand];
    double mean_ap = 0;
    bool failed = false;
    for (int f = 0; f < folds.k && !failed; ++f) {
      try {
        auto train_idx = folds.train_rows(f);
        auto test_idx = folds.test_rows(f);
        Matrix Xtr(train_idx.size(), X.cols);
        std::vector<int> ytr(train_idx.size());
        for (std::size_t i = 0; i < train_idx.size(); ++i) {
          std::copy_n(X.row(train_idx[i]), X.cols, Xtr.row(i));
          ytr[i] = y[train_idx[i]];
        }
        if (smote_cfg != nullptr) {
          SmoteConfig sc = *smote_cfg;
          sc.seed = derive_seed(sc.seed, "tune-fold", cand, f);
          augment_with_smote(Xtr, ytr, sc);
        }
        ClassifierConfig fold_cfg = cfg;
        fold_cfg.seed = derive_seed(cfg.seed, "tune-fit", cand, f);
        TrainedModel model = train(Xtr, ytr, fold_cfg, 0);
        Matrix Xte(test_idx.size(), X.cols);
        std::vector<int> yte(test_idx.size());
        for (std::size_t i = 0; i < test_idx.size(); ++i) {
          std::copy_n(X.row(test_idx[i]), X.cols, Xte.row(i));
          yte[i] = y[test_idx[i]];
        }
        auto probs = predict_proba(model, Xte, 0);
        mean_ap += average_precision(probs, yte);
      } catch (const std::exception& e) {
        failed = true;
        last_error = e.what();
      }
    }
    if (failed) continue;
    mean_ap /= folds.k;
    if (mean_ap > best_score) {
      best_score = mean_ap;
      best_index = static_cast<int>(cand);
    }
  }
  if (best_index < 0)
    throw std::runtime_error("every hyper-grid candidate failed to train (last: " +
                             last_error + ")");
  return grid.candidates[best_index];
}

std::vector<ClassifierConfig> default_grid() {
  std::vector<ClassifierConfig> grid;
  for (double lr : {0.01, 0.05, 0.1})
    for (double l2 : {0.0, 0.1, 1.0})
      for (int epochs : {50, 200}) {
        ClassifierConfig cfg;
        cfg.learning_rate = lr;
        cfg.l2_strength = l2;
        cfg.epochs = epochs;
        grid.push_back(cfg);
      }
  return grid;
}

}  // namespace hmc
