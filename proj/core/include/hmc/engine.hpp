#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hmc/dataset.hpp"
#include "hmc/hierarchy.hpp"
#include "hmc/learn.hpp"
#include "hmc/resample.hpp"

namespace hmc {

enum class ClassStatus {
  trained,     // target class with fitted per-fold models
  structural,  // outside the class-size range; local probability fixed at 1
  saturated,   // target whose subgraph labels leave no negative stratum
  skipped      // too few positives, or below a skipped ancestor
};

const char* to_string(ClassStatus s);

struct FoldSummary {
  int fold = 0;
  double average_precision = 0;
  std::size_t test_rows = 0;
};

struct ClassResult {
  std::string class_id;
  ClassStatus status = ClassStatus::structural;
  std::string note;
  ClassifierConfig chosen;
  std::vector<TrainedModel> fold_models;
  std::vector<int> fold_of_row;      // held-out fold per row (trained only)
  std::vector<double> p_local;       // per row; out-of-fold for trained
  std::vector<double> p_cum;
  std::vector<int> labels;
  double threshold = 0.0;
  std::vector<FoldSummary> fold_summaries;
};

struct PredictionRecord {
  std::string node;
  std::string cls;
  double p_local = 0;
  double p_cum = 0;
  double threshold = 0;
  int decision = 0;
};

struct EngineConfig {
  int k = 5;
  std::uint64_t seed = 42;
  std::vector<ClassifierConfig> grid;  // empty selects default_grid()
  SmoteConfig smote;
  bool use_smote = true;
  ClassifierKind classifier_kind = ClassifierKind::builtin_logistic;
  std::string external_cmd;
  std::string work_dir;  // scratch space for external adapters
};

// Deterministic fold seed shared between the engine and the baseline.
std::uint64_t fold_seed_for(std::uint64_t master, const std::string& sub_root,
                            const std::string& cls);

// Trains every target class of the sub-hierarchy in topological order.
// Ancestor-prediction features come from out-of-fold parent cumulative
// probabilities; SMOTE touches training folds only. Structural and saturated
// classes contribute p_local = 1 and threshold 0; a class with fewer than k
// positives is skipped together with its descendants.
std::vector<ClassResult> train_subhierarchy(const SubHierarchy& sub,
                                            const FeatureBundle& fb,
                                            const AnnotationMap& closed,
                                            const EngineConfig& cfg);

// p_cum(v, root) = p_local(v, root); p_cum(v, C) = p_cum(v, parent) * p_local.
// Every vector is aligned to one shared row order.
std::map<std::string, std::vector<double>> cumulative_probabilities(
    const TreeHierarchy& tree,
    const std::map<std::string, std::vector<double>>& p_local);

// Among thresholds induced by distinct score values (decision: score >= t),
// the one maximizing F1; ties break toward the smallest threshold.
double optimum_threshold(const std::vector<double>& scores,
                         const std::vector<int>& labels);

struct DecisionOutput {
  std::vector<PredictionRecord> records;  // one per (row, target class)
  // phi-prime restricted to the sub-hierarchy scope; ancestor-closed.
  std::map<std::string, std::set<std::string>> extended;
};

// decision(v, C) = own-gate AND parent decision, where the own gate is
// p_cum >= threshold for trained classes and always open otherwise. Classes
// absent from `thresholds` (skipped) never fire. Verifies true-path
// consistency of its own output. Records carry the local probabilities from
// `p_local` when given, otherwise the ratio p_cum / parent p_cum.
DecisionOutput decide_and_extend(
    const SubHierarchy& sub,
    const std::map<std::string, std::vector<double>>& p_cum,
    const std::map<std::string, double>& thresholds,
    const AnnotationMap& closed,
    const std::map<std::string, std::vector<double>>* p_local = nullptr);

struct SubRunResult {
  std::string root;
  std::vector<ClassResult> classes;
  DecisionOutput decisions;
};

// train_subhierarchy + decide_and_extend over the class results.
SubRunResult run_subhierarchy(const SubHierarchy& sub, const FeatureBundle& fb,
                              const AnnotationMap& closed,
                              const EngineConfig& cfg);

// Widened inference: p_local over every node of fb.net. Rows of the training
// subgraph keep their out-of-fold values; other nodes receive the fold-
// ensemble mean. Structural and saturated classes stay at 1.
std::map<std::string, std::vector<double>> widened_local_probs(
    const SubHierarchy& sub, const FeatureBundle& fb,
    const AnnotationMap& closed, const std::vector<ClassResult>& results);

}  // namespace hmc
