#pragma once

#include <cstdint>
#include <vector>

#include "hmc/util.hpp"

namespace hmc {

struct FoldAssignment {
  int k = 0;
  std::vector<int> fold;  // per-row fold index in [0, k)

  std::vector<std::size_t> test_rows(int f) const;
  std::vector<std::size_t> train_rows(int f) const;
};

// Within each label stratum: seeded shuffle, then round-robin assignment.
// Requires at least k rows of each label value.
FoldAssignment stratified_kfold(const std::vector<int>& labels, int k,
                                std::uint64_t seed);

struct SmoteConfig {
  int k_neighbors = 5;
  double target_ratio = 1.0;  // minority:majority after oversampling
  std::uint64_t seed = 0;
};

struct SmotePick {
  std::size_t base;
  std::size_t neighbor;
  double u;
};

// Each synthetic row is x + u * (x_nn - x) for a seeded-random minority row x,
// one of its k nearest minority neighbors x_nn (Euclidean), and u uniform in
// [0, 1). k_neighbors is clamped to |minority| - 1. Values are clamped onto
// the generating segment so interpolation never escapes it.
Matrix smote(const Matrix& minority_rows, std::size_t synthetic_count,
             const SmoteConfig& cfg, std::vector<SmotePick>* picks = nullptr);

// Rows needed to bring the minority stratum up to target_ratio * majority.
std::size_t smote_synthetic_count(std::size_t minority, std::size_t majority,
                                  double target_ratio);

// Appends synthetic rows of the minority label to X/y until the minority
// stratum reaches target_ratio * majority. Returns provenance flags, true for
// synthetic rows; original rows keep their positions.
std::vector<char> augment_with_smote(Matrix& X, std::vector<int>& y,
                                     const SmoteConfig& cfg);

}  // namespace hmc
