// Batch CLI for hierarchical multi-label node classification over networks.
//
// Stages: normalize | split | features | embed | train | predict | eval |
// baseline | run. Each subcommand consumes the previous stage's artifacts
// from the output directory and emits its own; `run` composes them all.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "hmc/config.hpp"
#include "hmc/pipeline.hpp"
#include "hmc/util.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::string out_dir;
  std::string baseline;
  std::int64_t seed = -1;
  int threads = -1;
  std::string log;
  bool widen = false;
};

hmc::RunConfig resolve_config(const CliOverrides& o) {
  if (o.config_path.empty())
    throw hmc::InputError("--config is required");
  hmc::RunConfig cfg = hmc::parse_config_file(o.config_path);
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (o.threads >= 0) cfg.threads = o.threads;
  if (o.widen) cfg.widen_candidates = true;
  if (!o.baseline.empty()) {
    if (o.baseline != "hbn")
      throw hmc::InputError("unknown baseline '" + o.baseline +
                            "'; only 'hbn' is available");
    cfg.run_baseline = true;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "hmc - hierarchical multi-label node classification over networks.\n"
      "Normalizes a class DAG to a tree, trains one probabilistic classifier\n"
      "per class top-down, enforces the true-path rule through cumulative\n"
      "probabilities, and evaluates against a binomial-neighborhood baseline."};
  app.require_subcommand(1);
  app.fallthrough(true);

  CliOverrides o;
  app.add_option("-c,--config", o.config_path,
                 "Config file (key = value pairs in [section] groups)")
      ->required(false);
  app.add_option("-o,--out", o.out_dir, "Output directory (overrides config)");
  app.add_option("--seed", o.seed, "Master seed (overrides config)");
  app.add_option("--threads", o.threads,
                 "Worker pool size; 0 = available parallelism");
  app.add_option("--log", o.log, "Verbosity: quiet | info | debug");
  app.add_flag("--widen", o.widen,
               "Widen prediction candidates to every network node");

  auto* normalize = app.add_subcommand(
      "normalize", "Close annotations and normalize the class DAG to a tree");
  auto* split = app.add_subcommand(
      "split", "Split the tree into sub-hierarchies with node subgraphs");
  auto* features =
      app.add_subcommand("features", "Compute per-node topological features");
  auto* embed = app.add_subcommand(
      "embed", "Train node embeddings from biased random walks");
  auto* train = app.add_subcommand(
      "train", "Train per-class classifiers top-down with cross-validation");
  auto* predict = app.add_subcommand(
      "predict", "Apply thresholds to cumulative probabilities");
  auto* eval =
      app.add_subcommand("eval", "Score predictions and dump metric reports");
  auto* baseline = app.add_subcommand(
      "baseline", "Run the binomial-neighborhood baseline on the same folds");
  auto* run = app.add_subcommand("run", "Execute the full pipeline");
  run->add_option("--baseline", o.baseline,
                  "Also run the named baseline (hbn)");

  app.footer(
      "Config keys (defaults in parentheses):\n"
      "  [input]      edges, annotations, hierarchy (*.obo -> OBO-lite),\n"
      "               nodes (optional node list)\n"
      "  [filter]     min_count (5), max_count (300)\n"
      "  [cv]         k (5), seed (42)\n"
      "  [walk]       p (1.0), q (1.0), walk_length (30), walks_per_node (10)\n"
      "  [embedding]  dimension (64), window (5), negative_samples (5),\n"
      "               epochs (5), learning_rate (0.025), threads (1)\n"
      "  [classifier] kind (builtin-logistic), external_cmd (),\n"
      "               grid_learning_rate (0.01,0.05,0.1), grid_l2 (0.0,0.1,1.0),\n"
      "               grid_epochs (50,200)\n"
      "  [smote]      enabled (true), k_neighbors (5), target_ratio (1.0)\n"
      "  [features]   include_clustering (true)\n"
      "  [output]     dir (out), dump_datasets (false), dump_folds (false)\n"
      "  [run]        widen_candidates (false), baseline (false), threads (0)\n"
      "Relative paths resolve against the config file's directory.\n"
      "Exit codes: 0 success, 1 input error, 2 pipeline error. HMC_LOG sets\n"
      "the default verbosity.");

  CLI11_PARSE(app, argc, argv);

  hmc::set_log_level(hmc::log_level_from_env());
  if (o.log == "quiet") hmc::set_log_level(hmc::LogLevel::quiet);
  if (o.log == "info") hmc::set_log_level(hmc::LogLevel::info);
  if (o.log == "debug") hmc::set_log_level(hmc::LogLevel::debug);

  try {
    hmc::RunConfig cfg = resolve_config(o);
    if (normalize->parsed()) hmc::stage_normalize(cfg);
    if (split->parsed()) hmc::stage_split(cfg);
    if (features->parsed()) hmc::stage_features(cfg);
    if (embed->parsed()) hmc::stage_embed(cfg);
    if (train->parsed()) hmc::stage_train(cfg);
    if (predict->parsed()) hmc::stage_predict(cfg);
    if (eval->parsed()) hmc::stage_eval(cfg);
    if (baseline->parsed()) hmc::stage_baseline(cfg);
    if (run->parsed()) hmc::run_pipeline(cfg);
    return 0;
  } catch (const hmc::PipelineError& e) {
    std::fprintf(stderr, "error: stage=%s%s%s: %s\n", e.stage().c_str(),
                 e.sub().empty() ? "" : " sub=", e.sub().c_str(), e.what());
    return e.is_input_error() ? 1 : 2;
  } catch (const hmc::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
