#include "hmc/config.hpp"

#include <filesystem>
#include <sstream>

#include "hmc/util.hpp"

namespace hmc {

std::vector<ClassifierConfig> RunConfig::grid() const {
  std::vector<ClassifierConfig> out;
  for (double lr : grid_learning_rates)
    for (double l2 : grid_l2)
      for (int epochs : grid_epochs) {
        ClassifierConfig cfg;
        cfg.kind = classifier_kind;
        cfg.learning_rate = lr;
        cfg.l2_strength = l2;
        cfg.epochs = epochs;
        cfg.external_cmd = external_cmd;
        out.push_back(cfg);
      }
  return out;
}

namespace {

bool parse_bool(const std::string& v, const std::string& context) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InputError(context + ": expected a boolean, got '" + v + "'");
}

std::vector<double> parse_double_list(const std::string& v,
                                      const std::string& context) {
  std::vector<double> out;
  for (const auto& part : split(v, ','))
    out.push_back(parse_double(part, context));
  if (out.empty()) throw InputError(context + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& v,
                                const std::string& context) {
  std::vector<int> out;
  for (const auto& part : split(v, ','))
    out.push_back(static_cast<int>(parse_int(part, context)));
  if (out.empty()) throw InputError(context + ": empty list");
  return out;
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

RunConfig parse_config_text(const std::string& text,
                            const std::string& base_dir) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw InputError("config line " + std::to_string(lineno) +
                       ": expected `key = value`, got '" + t + "'");
    const std::string key = section + "." + trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const std::string ctx = "config key '" + key + "'";

    if (key == "input.edges") cfg.edges_path = resolve(base_dir, value);
    else if (key == "input.annotations") cfg.annotations_path = resolve(base_dir, value);
    else if (key == "input.hierarchy") cfg.hierarchy_path = resolve(base_dir, value);
    else if (key == "input.nodes") cfg.nodes_path = resolve(base_dir, value);
    else if (key == "filter.min_count") cfg.min_count = parse_int(value, ctx);
    else if (key == "filter.max_count") cfg.max_count = parse_int(value, ctx);
    else if (key == "cv.k") cfg.k = static_cast<int>(parse_int(value, ctx));
    else if (key == "cv.seed") cfg.seed = static_cast<std::uint64_t>(parse_int(value, ctx));
    else if (key == "walk.p") cfg.walk.p = parse_double(value, ctx);
    else if (key == "walk.q") cfg.walk.q = parse_double(value, ctx);
    else if (key == "walk.walk_length") cfg.walk.walk_length = static_cast<int>(parse_int(value, ctx));
    else if (key == "walk.walks_per_node") cfg.walk.walks_per_node = static_cast<int>(parse_int(value, ctx));
    else if (key == "embedding.dimension") cfg.embedding.dimension = static_cast<int>(parse_int(value, ctx));
    else if (key == "embedding.window") cfg.embedding.window = static_cast<int>(parse_int(value, ctx));
    else if (key == "embedding.negative_samples") cfg.embedding.negative_samples = static_cast<int>(parse_int(value, ctx));
    else if (key == "embedding.epochs") cfg.embedding.epochs = static_cast<int>(parse_int(value, ctx));
    else if (key == "embedding.learning_rate") cfg.embedding.learning_rate = parse_double(value, ctx);
    else if (key == "embedding.threads") cfg.embedding.threads = static_cast<int>(parse_int(value, ctx));
    else if (key == "classifier.kind") {
      if (value == "builtin-logistic") cfg.classifier_kind = ClassifierKind::builtin_logistic;
      else if (value == "external") cfg.classifier_kind = ClassifierKind::external;
      else throw InputError(ctx + ": unknown classifier kind '" + value + "'");
    }
    else if (key == "classifier.external_cmd") cfg.external_cmd = value;
    else if (key == "classifier.grid_learning_rate") cfg.grid_learning_rates = parse_double_list(value, ctx);
    else if (key == "classifier.grid_l2") cfg.grid_l2 = parse_double_list(value, ctx);
    else if (key == "classifier.grid_epochs") cfg.grid_epochs = parse_int_list(value, ctx);
    else if (key == "smote.enabled") cfg.use_smote = parse_bool(value, ctx);
    else if (key == "smote.k_neighbors") cfg.smote.k_neighbors = static_cast<int>(parse_int(value, ctx));
    else if (key == "smote.target_ratio") cfg.smote.target_ratio = parse_double(value, ctx);
    else if (key == "features.include_clustering") cfg.include_clustering = parse_bool(value, ctx);
    else if (key == "output.dir") cfg.out_dir = resolve(base_dir, value);
    else if (key == "output.dump_datasets") cfg.dump_datasets = parse_bool(value, ctx);
    else if (key == "output.dump_folds") cfg.dump_folds = parse_bool(value, ctx);
    else if (key == "run.widen_candidates") cfg.widen_candidates = parse_bool(value, ctx);
    else if (key == "run.baseline") cfg.run_baseline = parse_bool(value, ctx);
    else if (key == "run.threads") cfg.threads = static_cast<int>(parse_int(value, ctx));
    else throw InputError("unknown config key '" + key + "'");
  }

  if (cfg.min_count < 1 || cfg.min_count > cfg.max_count)
    throw InputError("filter bounds must satisfy 1 <= min_count <= max_count");
  if (cfg.k < 2) throw InputError("cv.k must be at least 2");
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::filesystem::path p(path);
  return parse_config_text(read_text_file(path), p.parent_path().string());
}

std::string config_to_text(const RunConfig& cfg) {
  std::string s;
  auto add = [&](const std::string& key, const std::string& value) {
    s += key + " = " + value + "\n";
  };
  add("input.edges", cfg.edges_path);
  add("input.annotations", cfg.annotations_path);
  add("input.hierarchy", cfg.hierarchy_path);
  add("input.nodes", cfg.nodes_path);
  add("filter.min_count", std::to_string(cfg.min_count));
  add("filter.max_count", std::to_string(cfg.max_count));
  add("cv.k", std::to_string(cfg.k));
  add("cv.seed", std::to_string(cfg.seed));
  add("walk.p", format_double(cfg.walk.p));
  add("walk.q", format_double(cfg.walk.q));
  add("walk.walk_length", std::to_string(cfg.walk.walk_length));
  add("walk.walks_per_node", std::to_string(cfg.walk.walks_per_node));
  add("embedding.dimension", std::to_string(cfg.embedding.dimension));
  add("embedding.window", std::to_string(cfg.embedding.window));
  add("embedding.negative_samples", std::to_string(cfg.embedding.negative_samples));
  add("embedding.epochs", std::to_string(cfg.embedding.epochs));
  add("embedding.learning_rate", format_double(cfg.embedding.learning_rate));
  add("embedding.threads", std::to_string(cfg.embedding.threads));
  add("classifier.kind", cfg.classifier_kind == ClassifierKind::external
                             ? "external"
                             : "builtin-logistic");
  add("classifier.external_cmd", cfg.external_cmd);
  std::string lrs;
  for (double v : cfg.grid_learning_rates) lrs += (lrs.empty() ? "" : ",") + format_double(v);
  add("classifier.grid_learning_rate", lrs);
  std::string l2s;
  for (double v : cfg.grid_l2) l2s += (l2s.empty() ? "" : ",") + format_double(v);
  add("classifier.grid_l2", l2s);
  std::string eps;
  for (int v : cfg.grid_epochs) eps += (eps.empty() ? "" : ",") + std::to_string(v);
  add("classifier.grid_epochs", eps);
  add("smote.enabled", cfg.use_smote ? "true" : "false");
  add("smote.k_neighbors", std::to_string(cfg.smote.k_neighbors));
  add("smote.target_ratio", format_double(cfg.smote.target_ratio));
  add("features.include_clustering", cfg.include_clustering ? "true" : "false");
  add("output.dump_datasets", cfg.dump_datasets ? "true" : "false");
  add("output.dump_folds", cfg.dump_folds ? "true" : "false");
  add("run.widen_candidates", cfg.widen_candidates ? "true" : "false");
  add("run.baseline", cfg.run_baseline ? "true" : "false");
  return s;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  return fnv1a64(config_to_text(cfg));
}

}  // namespace hmc
