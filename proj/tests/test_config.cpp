#include "doctest.h"
#include "hmc/config.hpp"
#include "support/synthetic.hpp"

using namespace hmc;
namespace ts = hmc::testsupport;

TEST_CASE("defaults hold when the config is minimal") {
  RunConfig cfg = parse_config_text(
      "[input]\nedges = e.tsv\nannotations = a.tsv\nhierarchy = h.tsv\n", "");
  CHECK(cfg.min_count == 5);
  CHECK(cfg.max_count == 300);
  CHECK(cfg.k == 5);
  CHECK(cfg.seed == 42);
  CHECK(cfg.walk.walk_length == 30);
  CHECK(cfg.walk.walks_per_node == 10);
  CHECK(cfg.embedding.dimension == 64);
  CHECK(cfg.embedding.window == 5);
  CHECK(cfg.embedding.negative_samples == 5);
  CHECK(cfg.use_smote);
  CHECK(cfg.smote.k_neighbors == 5);
  CHECK(cfg.smote.target_ratio == 1.0);
  CHECK(cfg.grid().size() == 18);
  CHECK_FALSE(cfg.widen_candidates);
  CHECK_FALSE(cfg.run_baseline);
}

TEST_CASE("sections, comments and overrides parse") {
  RunConfig cfg = parse_config_text(
      "# a comment\n"
      "[input]\n"
      "edges = graph/e.tsv\n"
      "annotations = a.tsv\n"
      "hierarchy = go.obo\n"
      "[filter]\n"
      "min_count = 3\n"
      "max_count = 50\n"
      "[cv]\n"
      "k = 4\n"
      "seed = 7\n"
      "[walk]\n"
      "p = 0.5\n"
      "q = 2.0\n"
      "[classifier]\n"
      "grid_learning_rate = 0.1\n"
      "grid_l2 = 0.0,0.5\n"
      "grid_epochs = 25\n"
      "[smote]\n"
      "enabled = false\n"
      "[run]\n"
      "baseline = true\n",
      "/base");
  CHECK(cfg.edges_path == "/base/graph/e.tsv");  // resolved vs config dir
  CHECK(cfg.hierarchy_path == "/base/go.obo");
  CHECK(cfg.min_count == 3);
  CHECK(cfg.max_count == 50);
  CHECK(cfg.k == 4);
  CHECK(cfg.seed == 7);
  CHECK(cfg.walk.p == 0.5);
  CHECK(cfg.walk.q == 2.0);
  CHECK(cfg.grid().size() == 2);  // 1 lr x 2 l2 x 1 epochs
  CHECK_FALSE(cfg.use_smote);
  CHECK(cfg.run_baseline);
}

TEST_CASE("unknown keys and malformed values are input errors") {
  CHECK_THROWS_WITH_AS(parse_config_text("[input]\nedgez = x\n", ""),
                       doctest::Contains("unknown config key"), InputError);
  CHECK_THROWS_AS(parse_config_text("[cv]\nk = soon\n", ""), InputError);
  CHECK_THROWS_AS(parse_config_text("[cv]\nk\n", ""), InputError);
  CHECK_THROWS_AS(parse_config_text("[filter]\nmin_count = 10\nmax_count = 2\n", ""),
                  InputError);
  CHECK_THROWS_AS(parse_config_text("[smote]\nenabled = perhaps\n", ""),
                  InputError);
}

TEST_CASE("config hash is stable and seed-sensitive") {
  RunConfig a = parse_config_text("[cv]\nseed = 1\n", "");
  RunConfig b = parse_config_text("[cv]\nseed = 1\n", "");
  RunConfig c = parse_config_text("[cv]\nseed = 2\n", "");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  // Output directory is deliberately outside the hash.
  RunConfig d = a;
  d.out_dir = "elsewhere";
  CHECK(config_hash(a) == config_hash(d));
}
