#include "hmc/resample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hmc/random.hpp"

namespace hmc {

std::vector<std::size_t> FoldAssignment::test_rows(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i)
    if (fold[i] == f) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldAssignment::train_rows(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i)
    if (fold[i] != f) out.push_back(i);
  return out;
}

FoldAssignment stratified_kfold(const std::vector<int>& labels, int k,
                                std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] == 1 ? positives : negatives).push_back(i);
  if (static_cast<int>(positives.size()) < k)
    throw std::invalid_argument("insufficient positives for stratification");
  if (static_cast<int>(negatives.size()) < k)
    throw std::invalid_argument("insufficient negatives for stratification");

  FoldAssignment fa;
  fa.k = k;
  fa.fold.assign(labels.size(), -1);
  Rng pos_rng(derive_seed(seed, "kfold-pos"));
  Rng neg_rng(derive_seed(seed, "kfold-neg"));
  pos_rng.shuffle(positives);
  neg_rng.shuffle(negatives);
  for (std::size_t i = 0; i < positives.size(); ++i)
    fa.fold[positives[i]] = static_cast<int>(i % k);
  for (std::size_t i = 0; i < negatives.size(); ++i)
    fa.fold[negatives[i]] = static_cast<int>(i % k);
  return fa;
}

std::size_t smote_synthetic_count(std::size_t minority, std::size_t majority,
                                  double target_ratio) {
  if (!(target_ratio > 0.0 && target_ratio <= 1.0))
    throw std::invalid_argument("target_ratio must be in (0, 1]");
  double want = target_ratio * static_cast<double>(majority);
  double need = want - static_cast<double>(minority);
  if (need <= 0) return 0;
  return static_cast<std::size_t>(std::llround(std::ceil(need)));
}

std::vector<char> augment_with_smote(Matrix& X, std::vector<int>& y,
                                     const SmoteConfig& cfg) {
  std::size_t pos = 0;
  for (int v : y) pos += v == 1;
  std::size_t neg = y.size() - pos;
  std::vector<char> synthetic(y.size(), 0);
  if (pos == 0 || neg == 0) return synthetic;

  const int minority_label = pos <= neg ? 1 : 0;
  const std::size_t minority = std::min(pos, neg);
  const std::size_t majority = std::max(pos, neg);
  std::size_t need = smote_synthetic_count(minority, majority, cfg.target_ratio);
  if (need == 0 || minority < 2) return synthetic;

  Matrix rows(minority, X.cols);
  std::size_t r = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != minority_label) continue;
    std::copy_n(X.row(i), X.cols, rows.row(r++));
  }
  Matrix extra = smote(rows, need, cfg);
  const std::size_t base = X.rows;
  X.rows += need;
  X.data.resize(X.rows * X.cols);
  for (std::size_t i = 0; i < need; ++i)
    std::copy_n(extra.row(i), X.cols, X.row(base + i));
  y.insert(y.end(), need, minority_label);
  synthetic.insert(synthetic.end(), need, 1);
  return synthetic;
}

Matrix smote(const Matrix& minority_rows, std::size_t synthetic_count,
             const SmoteConfig& cfg, std::vector<SmotePick>* picks) {
  const std::size_t n = minority_rows.rows;
  const std::size_t d = minority_rows.cols;
  if (n < 2)
    throw std::invalid_argument(
        "SMOTE needs at least two minority rows to interpolate");
  if (cfg.k_neighbors < 1) throw std::invalid_argument("k_neighbors must be >= 1");

  const std::size_t k =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.k_neighbors), n - 1);

  // Exact nearest neighbours; minority sets are small by the class-size filter.
  std::vector<std::vector<std::size_t>> nn(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0;
      const double* a = minority_rows.row(i);
      const double* b = minority_rows.row(j);
      for (std::size_t c = 0; c < d; ++c) {
        double diff = a[c] - b[c];
        s += diff * diff;
      }
      dist.emplace_back(s, j);
    }
    std::sort(dist.begin(), dist.end());
    nn[i].reserve(k);
    for (std::size_t j = 0; j < k; ++j) nn[i].push_back(dist[j].second);
  }

  Matrix out(synthetic_count, d);
  if (picks != nullptr) picks->clear();
  Rng rng(derive_seed(cfg.seed, "smote"));
  for (std::size_t s = 0; s < synthetic_count; ++s) {
    std::size_t base = rng.uniform_below(n);
    std::size_t neighbor = nn[base][rng.uniform_below(nn[base].size())];
    double u = rng.uniform01();
    const double* x = minority_rows.row(base);
    const double* y = minority_rows.row(neighbor);
    double* row = out.row(s);
    for (std::size_t c = 0; c < d; ++c) {
      double v = x[c] + u * (y[c] - x[c]);
      double lo = std::min(x[c], y[c]);
      double hi = std::max(x[c], y[c]);
      row[c] = std::clamp(v, lo, hi);
    }
    if (picks != nullptr) picks->push_back({base, neighbor, u});
  }
  return out;
}

}  // namespace hmc
