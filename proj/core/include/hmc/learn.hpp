#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmc/resample.hpp"
#include "hmc/util.hpp"

namespace hmc {

enum class ClassifierKind { builtin_logistic, external };

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::builtin_logistic;
  double learning_rate = 0.05;
  int epochs = 100;
  double l2_strength = 0.0;
  std::uint64_t seed = 0;
  std::string external_cmd;  // adapter command when kind == external
};

struct TrainedModel {
  std::vector<double> weights;  // one per feature, bias last
  std::uint64_t schema_hash = 0;
  ClassifierConfig config;
  std::vector<double> epoch_loss;  // full-data loss after each epoch
};

// Mean cross-entropy plus (l2/2)*||w||^2 on the non-bias weights.
double logistic_loss(const Matrix& X, const std::vector<int>& y,
                     const std::vector<double>& weights, double l2);
std::vector<double> logistic_gradient(const Matrix& X, const std::vector<int>& y,
                                      const std::vector<double>& weights,
                                      double l2);

// Seeded mini-batch gradient descent with a linearly decaying step size.
TrainedModel train(const Matrix& X, const std::vector<int>& y,
                   const ClassifierConfig& cfg, std::uint64_t schema_hash = 0);

// Sigmoid of the affine score, clamped into [1e-15, 1 - 1e-15].
std::vector<double> predict_proba(const TrainedModel& model, const Matrix& X,
                                  std::uint64_t schema_hash = 0);

struct HyperGrid {
  std::vector<ClassifierConfig> candidates;
};

// Returns the candidate maximizing mean held-out average precision across
// folds; ties break toward grid order. A candidate whose training throws is
// scored -inf; all candidates failing is an error. When smote_cfg is given,
// training folds are augmented before fitting (test folds never are).
ClassifierConfig tune(const Matrix& X, const std::vector<int>& y,
                      const HyperGrid& grid, const FoldAssignment& folds,
                      const SmoteConfig* smote_cfg = nullptr);

std::vector<ClassifierConfig> default_grid();

}  // namespace hmc
