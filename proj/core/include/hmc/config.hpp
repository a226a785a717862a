#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmc/embedding.hpp"
#include "hmc/learn.hpp"
#include "hmc/resample.hpp"

namespace hmc {

// Every tunable of a batch run. Values mirror the `key = value` config file;
// all defaults are also what `--help` documents.
struct RunConfig {
  // [input]
  std::string edges_path;
  std::string annotations_path;
  std::string hierarchy_path;  // .obo parsed as OBO-lite, otherwise TSV edges
  std::string nodes_path;      // optional node list

  // [filter]
  std::int64_t min_count = 5;
  std::int64_t max_count = 300;

  // [cv]
  int k = 5;
  std::uint64_t seed = 42;

  // [walk]
  WalkConfig walk;

  // [embedding]
  EmbeddingConfig embedding;

  // [classifier]
  ClassifierKind classifier_kind = ClassifierKind::builtin_logistic;
  std::string external_cmd;
  std::vector<double> grid_learning_rates{0.01, 0.05, 0.1};
  std::vector<double> grid_l2{0.0, 0.1, 1.0};
  std::vector<int> grid_epochs{50, 200};

  // [smote]
  SmoteConfig smote;
  bool use_smote = true;

  // [features]
  bool include_clustering = true;

  // [output]
  std::string out_dir = "out";
  bool dump_datasets = false;
  bool dump_folds = false;

  // [run]
  bool widen_candidates = false;
  bool run_baseline = false;
  int threads = 0;  // 0 = available parallelism

  std::vector<ClassifierConfig> grid() const;
};

RunConfig parse_config_text(const std::string& text,
                            const std::string& base_dir);
RunConfig parse_config_file(const std::string& path);

// Canonical serialization; its hash keys the run manifest.
std::string config_to_text(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace hmc
