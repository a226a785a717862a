#include "hmc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "hmc/annotations.hpp"
#include "hmc/dataset.hpp"
#include "hmc/embedding.hpp"
#include "hmc/engine.hpp"
#include "hmc/hbn.hpp"
#include "hmc/hierarchy.hpp"
#include "hmc/metrics.hpp"
#include "hmc/network.hpp"
#include "hmc/obo.hpp"
#include "hmc/random.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hmc {

namespace {

std::atomic<int> g_log_level{static_cast<int>(LogLevel::info)};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// ---------------------------------------------------------------------------
// Manifest handling

fs::path manifest_path(const RunConfig& cfg) {
  return fs::path(cfg.out_dir) / "manifest.json";
}

json load_manifest(const RunConfig& cfg) {
  fs::path p = manifest_path(cfg);
  if (!fs::exists(p)) {
    json m;
    m["config"] = config_to_text(cfg);
    m["config_hash"] = to_hex(config_hash(cfg));
    m["seed"] = cfg.seed;
    m["stages"] = json::object();
    m["classes"] = json::object();
    return m;
  }
  json m = json::parse(read_text_file(p.string()));
  if (m.value("config_hash", "") != to_hex(config_hash(cfg)) ||
      m.value("seed", std::uint64_t{0}) != cfg.seed)
    throw PipelineError("manifest", "",
                        "existing artifacts in '" + cfg.out_dir +
                            "' were produced with a different config or seed; "
                            "use a fresh output directory");
  return m;
}

void save_manifest(const RunConfig& cfg, const json& m) {
  write_text_file(manifest_path(cfg).string(), m.dump(2) + "\n");
}

void record_stage(json& m, const RunConfig& cfg, const std::string& stage,
                  const std::vector<std::string>& outputs) {
  json entry;
  for (const auto& rel : outputs)
    entry["outputs"][rel] = to_hex(hash_file((fs::path(cfg.out_dir) / rel).string()));
  m["stages"][stage] = entry;
}

void require_stage(const json& m, const RunConfig& cfg, const std::string& needed,
                   const std::string& current) {
  if (!m["stages"].contains(needed))
    throw PipelineError(current, "",
                        "stage-order violation: run '" + needed +
                            "' before '" + current + "'");
  for (const auto& [rel, hash] : m["stages"][needed]["outputs"].items()) {
    fs::path p = fs::path(cfg.out_dir) / rel;
    if (!fs::exists(p) || to_hex(hash_file(p.string())) != hash.get<std::string>())
      throw PipelineError(current, "",
                          "stage-order violation: artifact '" + rel +
                              "' of stage '" + needed +
                              "' is missing or stale; re-run '" + needed + "'");
  }
}

// ---------------------------------------------------------------------------
// Ingest helpers

Hierarchy load_hierarchy_input(const RunConfig& cfg) {
  if (cfg.hierarchy_path.empty())
    throw InputError("input.hierarchy is not configured");
  fs::path p(cfg.hierarchy_path);
  if (p.extension() == ".obo") return load_obo_file(cfg.hierarchy_path);
  return load_hierarchy_file(cfg.hierarchy_path);
}

struct Ingest {
  Network net;
  Hierarchy hierarchy;
  AnnotationMap phi;
  AnnotationMap closed;
};

// Loads and cross-validates every configured input.
Ingest ingest_inputs(const RunConfig& cfg, bool need_network) {
  try {
    Ingest in;
    in.hierarchy = load_hierarchy_input(cfg);
    if (cfg.annotations_path.empty())
      throw InputError("input.annotations is not configured");
    in.phi = load_annotations_file(cfg.annotations_path);
    in.closed = close_annotations(in.phi, in.hierarchy);
    if (need_network) {
      if (cfg.edges_path.empty())
        throw InputError("input.edges is not configured");
      in.net = load_network_file(cfg.edges_path, cfg.nodes_path);
      for (const auto& cls : in.hierarchy.class_ids())
        if (in.net.find(cls))
          throw InputError("class identifier '" + cls +
                           "' collides with a network node identifier");
      for (const auto& [node, classes] : in.phi.by_node()) {
        (void)classes;
        if (!in.net.find(node))
          throw InputError("annotated node '" + node +
                           "' does not appear in the network");
      }
    }
    return in;
  } catch (const InputError& e) {
    throw PipelineError("ingest", "", e.what(), true);
  } catch (const std::invalid_argument& e) {
    throw PipelineError("ingest", "", e.what(), true);
  }
}

// ---------------------------------------------------------------------------
// Split artifact IO

std::string sub_dir_name(const std::string& root) {
  return "sub_" + sanitize_for_path(root);
}

struct SplitArtifacts {
  std::vector<std::string> roots;  // manifest order (ascending class count)
};

void write_sub_artifacts(const RunConfig& cfg, const SubHierarchy& sub,
                         const std::map<std::string, std::int64_t>& counts) {
  fs::path dir = fs::path(cfg.out_dir) / sub_dir_name(sub.root);
  std::string classes = "class\tparent\tannotated_count\trole\n";
  for (int idx : sub.tree.topological_order()) {
    const std::string& cls = sub.tree.class_ids[idx];
    int parent = sub.tree.parent[idx];
    auto cit = counts.find(cls);
    classes += cls + "\t" + (parent < 0 ? "" : sub.tree.class_ids[parent]) +
               "\t" + std::to_string(cit == counts.end() ? 0 : cit->second) +
               "\t" + (sub.targets.count(cls) ? "target" : "structural") + "\n";
  }
  write_text_file((dir / "classes.tsv").string(), classes);

  std::string nodes;
  for (const auto& id : sub.row_nodes) nodes += id + "\n";
  write_text_file((dir / "nodes.tsv").string(), nodes);
  save_network_file(sub.subgraph, (dir / "edges.tsv").string());
}

SubHierarchy load_sub_artifacts(const RunConfig& cfg, const std::string& root) {
  fs::path dir = fs::path(cfg.out_dir) / sub_dir_name(root);
  SubHierarchy sub;
  sub.root = root;

  std::istringstream classes(read_text_file((dir / "classes.tsv").string()));
  std::string line;
  std::getline(classes, line);  // header
  std::vector<std::pair<std::string, std::string>> parent_of;
  while (std::getline(classes, line)) {
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 4)
      throw PipelineError("split", root, "malformed classes.tsv row: " + line);
    sub.classes.push_back(fields[0]);
    parent_of.emplace_back(fields[0], fields[1]);
    if (fields[3] == "target") sub.targets.insert(fields[0]);
  }
  sub.tree.class_ids = sub.classes;
  for (std::size_t i = 0; i < sub.classes.size(); ++i)
    sub.tree.index.emplace(sub.classes[i], static_cast<int>(i));
  sub.tree.parent.assign(sub.classes.size(), -1);
  sub.tree.children.assign(sub.classes.size(), {});
  for (std::size_t i = 0; i < parent_of.size(); ++i) {
    const auto& [cls, parent] = parent_of[i];
    if (parent.empty()) {
      sub.tree.roots.push_back(static_cast<int>(i));
      continue;
    }
    int p = sub.tree.require(parent);
    sub.tree.parent[i] = p;
    sub.tree.children[p].push_back(static_cast<int>(i));
  }

  std::istringstream nodes(read_text_file((dir / "nodes.tsv").string()));
  std::vector<std::string> node_list;
  while (std::getline(nodes, line)) {
    if (!trim(line).empty()) node_list.push_back(trim(line));
  }
  fs::path edges = dir / "edges.tsv";
  NetworkBuilder builder;
  builder.declare_nodes(node_list);
  std::istringstream es(read_text_file(edges.string()));
  while (std::getline(es, line)) {
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3)
      throw PipelineError("split", root, "malformed subgraph edge: " + line);
    builder.add_edge(fields[0], fields[1],
                     parse_double(fields[2], "subgraph edge"), edges.string());
  }
  sub.subgraph = builder.build();
  sub.row_nodes = sub.subgraph.node_ids();
  return sub;
}

std::vector<std::string> read_split_manifest(const RunConfig& cfg) {
  std::istringstream in(
      read_text_file((fs::path(cfg.out_dir) / "split_manifest.tsv").string()));
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::string> roots;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    roots.push_back(split(line, '\t')[0]);
  }
  return roots;
}

// ---------------------------------------------------------------------------
// Worker pool over sub-hierarchies

void parallel_over(std::size_t count, int threads,
                   const std::function<void(std::size_t)>& fn) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  int n = threads > 0 ? threads : (hw > 0 ? hw : 1);
  n = std::min<int>(n, static_cast<int>(count));
  if (n <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  for (int t = 0; t < n; ++t)
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

EngineConfig engine_config_from(const RunConfig& cfg) {
  EngineConfig ec;
  ec.k = cfg.k;
  ec.seed = cfg.seed;
  ec.grid = cfg.grid();
  ec.smote = cfg.smote;
  ec.use_smote = cfg.use_smote;
  ec.classifier_kind = cfg.classifier_kind;
  ec.external_cmd = cfg.external_cmd;
  ec.work_dir = (fs::path(cfg.out_dir) / "tmp").string();
  return ec;
}

// Widened runs compute features and embeddings once over the full network.
bool widened(const RunConfig& cfg) { return cfg.widen_candidates; }

constexpr const char* kLocalProbsName = "local_probs.tsv";
constexpr const char* kClassStatusName = "class_status.tsv";

void append_timing(const RunConfig& cfg, const std::string& file,
                   const std::string& root, double seconds) {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  fs::path p = fs::path(cfg.out_dir) / file;
  std::string prev = fs::exists(p) ? read_text_file(p.string()) : "";
  write_text_file(p.string(), prev + root + "\t" + format_double(seconds) + "\n");
}

}  // namespace

void set_log_level(LogLevel level) { g_log_level = static_cast<int>(level); }

LogLevel log_level_from_env() {
  const char* env = std::getenv("HMC_LOG");
  if (env == nullptr) return LogLevel::info;
  std::string v(env);
  if (v == "quiet") return LogLevel::quiet;
  if (v == "debug") return LogLevel::debug;
  return LogLevel::info;
}

void log_info(const std::string& msg) {
  if (g_log_level >= static_cast<int>(LogLevel::info))
    std::fprintf(stderr, "[hmc] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (g_log_level >= static_cast<int>(LogLevel::debug))
    std::fprintf(stderr, "[hmc:debug] %s\n", msg.c_str());
}

// ---------------------------------------------------------------------------

void stage_normalize(const RunConfig& cfg) {
  Ingest in = ingest_inputs(cfg, /*need_network=*/false);
  try {
    ClassCensus census = annotation_census(in.hierarchy, in.closed);
    TreeHierarchy tree = normalize(in.hierarchy, census);
    save_tree_file(tree, (fs::path(cfg.out_dir) / "tree.tsv").string());
    std::string removed;
    for (const auto& [p, c] : removed_edges(in.hierarchy, tree))
      removed += p + "\t" + c + "\n";
    write_text_file((fs::path(cfg.out_dir) / "removed_edges.tsv").string(),
                    removed);

    json m = load_manifest(cfg);
    record_stage(m, cfg, "normalize", {"tree.tsv", "removed_edges.tsv"});
    save_manifest(cfg, m);
    log_info("normalize: " + std::to_string(tree.class_count()) + " classes, " +
             std::to_string(std::count_if(tree.parent.begin(), tree.parent.end(),
                                          [](int p) { return p >= 0; })) +
             " tree edges");
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError("normalize", "", e.what());
  }
}

void stage_split(const RunConfig& cfg) {
  json m = load_manifest(cfg);
  require_stage(m, cfg, "normalize", "split");
  Ingest in = ingest_inputs(cfg, /*need_network=*/true);
  try {
    TreeHierarchy tree =
        load_tree_file((fs::path(cfg.out_dir) / "tree.tsv").string());
    auto subs =
        split_subhierarchies(tree, in.closed, in.net, cfg.min_count, cfg.max_count);

    std::map<std::string, std::int64_t> counts;
    for (const auto& [node, classes] : in.closed.by_node()) {
      (void)node;
      for (const auto& cls : classes) ++counts[cls];
    }

    std::string manifest_tsv = "root\tclasses\tnodes\n";
    std::vector<std::string> outputs = {"split_manifest.tsv"};
    for (const auto& sub : subs) {
      manifest_tsv += sub.root + "\t" + std::to_string(sub.classes.size()) +
                      "\t" + std::to_string(sub.row_nodes.size()) + "\n";
      write_sub_artifacts(cfg, sub, counts);
      for (const char* f : {"classes.tsv", "nodes.tsv", "edges.tsv"})
        outputs.push_back(sub_dir_name(sub.root) + "/" + f);
    }
    write_text_file((fs::path(cfg.out_dir) / "split_manifest.tsv").string(),
                    manifest_tsv);

    record_stage(m, cfg, "split", outputs);
    save_manifest(cfg, m);
    log_info("split: " + std::to_string(subs.size()) + " sub-hierarchies");
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError("split", "", e.what());
  }
}

void stage_features(const RunConfig& cfg) {
  json m = load_manifest(cfg);
  require_stage(m, cfg, "split", "features");
  std::vector<std::string> outputs;
  try {
    if (widened(cfg)) {
      Ingest in = ingest_inputs(cfg, true);
      NodeFeatureTable table = topological_features(in.net);
      save_features_file(table, in.net,
                         (fs::path(cfg.out_dir) / "features.tsv").string());
      outputs.push_back("features.tsv");
    } else {
      auto roots = read_split_manifest(cfg);
      std::vector<std::string> files(roots.size());
      parallel_over(roots.size(), cfg.threads, [&](std::size_t i) {
        SubHierarchy sub = load_sub_artifacts(cfg, roots[i]);
        NodeFeatureTable table = topological_features(sub.subgraph);
        std::string rel = sub_dir_name(roots[i]) + "/features.tsv";
        save_features_file(table, sub.subgraph,
                           (fs::path(cfg.out_dir) / rel).string());
        files[i] = rel;
      });
      outputs = files;
    }
    record_stage(m, cfg, "features", outputs);
    save_manifest(cfg, m);
    log_info("features: done");
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError("features", "", e.what());
  }
}

void stage_embed(const RunConfig& cfg) {
  json m = load_manifest(cfg);
  require_stage(m, cfg, "split", "embed");
  try {
    std::vector<std::string> outputs;
    auto embed_one = [&](const Network& net, const std::string& tag,
                         const std::string& rel) {
      WalkConfig wc = cfg.walk;
      wc.seed = derive_seed(cfg.seed, "walks:" + tag);
      auto walks = generate_walks(net, wc);
      EmbeddingConfig ec = cfg.embedding;
      ec.seed = derive_seed(cfg.seed, "sgns:" + tag);
      EmbeddingMatrix emb = train_embeddings(walks, net, ec);
      save_embeddings(emb, (fs::path(cfg.out_dir) / rel).string(),
                      config_hash(cfg));
    };
    if (widened(cfg)) {
      Ingest in = ingest_inputs(cfg, true);
      embed_one(in.net, "__network__", "embeddings.tsv");
      outputs.push_back("embeddings.tsv");
    } else {
      auto roots = read_split_manifest(cfg);
      std::vector<std::string> files(roots.size());
      parallel_over(roots.size(), cfg.threads, [&](std::size_t i) {
        SubHierarchy sub = load_sub_artifacts(cfg, roots[i]);
        std::string rel = sub_dir_name(roots[i]) + "/embeddings.tsv";
        embed_one(sub.subgraph, roots[i], rel);
        files[i] = rel;
      });
      outputs = files;
    }
    record_stage(m, cfg, "embed", outputs);
    save_manifest(cfg, m);
    log_info("embed: done");
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError("embed", "", e.what());
  }
}

void stage_train(const RunConfig& cfg) {
  json m = load_manifest(cfg);
  require_stage(m, cfg, "split", "train");
  require_stage(m, cfg, "features", "train");
  require_stage(m, cfg, "embed", "train");
  Ingest in = ingest_inputs(cfg, true);

  // Shared feature tables for widened runs.
  NodeFeatureTable global_features;
  EmbeddingMatrix global_embeddings;
  if (widened(cfg)) {
    global_features = load_features_file(
        (fs::path(cfg.out_dir) / "features.tsv").string(), in.net);
    global_embeddings =
        load_embeddings((fs::path(cfg.out_dir) / "embeddings.tsv").string());
  }

  auto roots = read_split_manifest(cfg);
  std::vector<std::string> outputs;
  std::mutex outputs_mutex;
  json classes_entry = json::object();
  std::mutex classes_mutex;

  fs::path timing = fs::path(cfg.out_dir) / "train_timing.tsv";
  if (fs::exists(timing)) fs::remove(timing);

  try {
    parallel_over(roots.size(), cfg.threads, [&](std::size_t i) {
      const std::string& root = roots[i];
      auto start = std::chrono::steady_clock::now();
      SubHierarchy sub;
      try {
        sub = load_sub_artifacts(cfg, root);
        fs::path dir = fs::path(cfg.out_dir) / sub_dir_name(root);

        NodeFeatureTable sub_features;
        EmbeddingMatrix sub_embeddings;
        FeatureBundle fb;
        fb.include_clustering = cfg.include_clustering;
        if (widened(cfg)) {
          fb.net = &in.net;
          fb.features = &global_features;
          fb.embeddings = &global_embeddings;
        } else {
          sub_features = load_features_file((dir / "features.tsv").string(),
                                            sub.subgraph);
          sub_embeddings = load_embeddings((dir / "embeddings.tsv").string());
          fb.net = &sub.subgraph;
          fb.features = &sub_features;
          fb.embeddings = &sub_embeddings;
        }

        EngineConfig ec = engine_config_from(cfg);
        auto results = train_subhierarchy(sub, fb, in.closed, ec);

        // Local probabilities; widened runs cover the whole network.
        std::string probs = "node\tclass\tp_local\n";
        if (widened(cfg)) {
          auto wide = widened_local_probs(sub, fb, in.closed, results);
          for (const auto& res : results) {
            auto it = wide.find(res.class_id);
            if (it == wide.end()) continue;
            for (NodeId v = 0; v < in.net.node_count(); ++v)
              probs += in.net.node_id(v) + "\t" + res.class_id + "\t" +
                       format_double(it->second[v]) + "\n";
          }
        } else {
          for (const auto& res : results) {
            if (res.status == ClassStatus::skipped) continue;
            for (std::size_t r = 0; r < sub.row_nodes.size(); ++r)
              probs += sub.row_nodes[r] + "\t" + res.class_id + "\t" +
                       format_double(res.p_local[r]) + "\n";
          }
        }
        write_text_file((dir / kLocalProbsName).string(), probs);

        std::string status = "class\tstatus\tthreshold\tlearning_rate\tl2\tepochs\tnote\n";
        for (const auto& res : results) {
          status += res.class_id;
          status += "\t";
          status += to_string(res.status);
          status += "\t" + format_double(res.threshold);
          if (res.status == ClassStatus::trained) {
            status += "\t" + format_double(res.chosen.learning_rate) + "\t" +
                      format_double(res.chosen.l2_strength) + "\t" +
                      std::to_string(res.chosen.epochs);
          } else {
            status += "\t\t\t";
          }
          status += "\t" + res.note + "\n";
        }
        write_text_file((dir / kClassStatusName).string(), status);

        if (cfg.dump_folds) {
          for (const auto& res : results) {
            if (res.status != ClassStatus::trained) continue;
            std::string folds_tsv = "node\tfold\n";
            for (std::size_t r = 0; r < sub.row_nodes.size(); ++r)
              folds_tsv += sub.row_nodes[r] + "\t" +
                           std::to_string(res.fold_of_row[r]) + "\n";
            write_text_file(
                (dir / ("folds_" + sanitize_for_path(res.class_id) + ".tsv"))
                    .string(),
                folds_tsv);
          }
        }
        if (cfg.dump_datasets) {
          std::map<std::string, const ClassResult*> by_class;
          for (const auto& res : results) by_class[res.class_id] = &res;
          for (const auto& res : results) {
            if (res.status == ClassStatus::skipped) continue;
            if (sub.targets.count(res.class_id) == 0) continue;
            int local = sub.tree.require(res.class_id);
            int parent = sub.tree.parent[local];
            std::vector<double> parent_cum;
            if (parent >= 0)
              parent_cum = by_class.at(sub.tree.class_ids[parent])->p_cum;
            ClassDataset ds =
                build_dataset(sub, fb, in.closed, res.class_id,
                              parent < 0 ? nullptr : &parent_cum);
            dump_dataset_tsv(ds, (dir / ("dataset_" +
                                         sanitize_for_path(res.class_id) +
                                         ".tsv"))
                                     .string());
          }
        }

        {
          std::lock_guard<std::mutex> lock(classes_mutex);
          for (const auto& res : results) {
            json entry;
            entry["status"] = to_string(res.status);
            entry["threshold"] = res.threshold;
            if (!res.note.empty()) entry["note"] = res.note;
            if (res.status == ClassStatus::trained) {
              entry["learning_rate"] = res.chosen.learning_rate;
              entry["l2_strength"] = res.chosen.l2_strength;
              entry["epochs"] = res.chosen.epochs;
              if (!res.fold_models.empty())
                entry["schema_hash"] = to_hex(res.fold_models[0].schema_hash);
              json folds = json::array();
              for (const auto& fsu : res.fold_summaries) {
                json f;
                f["fold"] = fsu.fold;
                f["average_precision"] = fsu.average_precision;
                f["test_rows"] = fsu.test_rows;
                folds.push_back(f);
              }
              entry["folds"] = folds;
            }
            classes_entry[root + "/" + res.class_id] = entry;
          }
        }
        {
          std::lock_guard<std::mutex> lock(outputs_mutex);
          outputs.push_back(sub_dir_name(root) + "/" + kLocalProbsName);
          outputs.push_back(sub_dir_name(root) + "/" + kClassStatusName);
        }
        append_timing(cfg, "train_timing.tsv", root, seconds_since(start));
        log_info("train: " + root + " done");
      } catch (const PipelineError&) {
        throw;
      } catch (const std::exception& e) {
        throw PipelineError("train", root, e.what());
      }
    });
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError("train", "", e.what());
  }

  std::sort(outputs.begin(), outputs.end());
  m["classes"] = classes_entry;
  record_stage(m, cfg, "train", outputs);
  save_manifest(cfg, m);
}

void stage_predict(const RunConfig& cfg) {
  json m = load_manifest(cfg);
  require_stage(m, cfg, "train", "predict");
  Ingest in = ingest_inputs(cfg, true);
  try {
    auto roots = read_split_manifest(cfg);
    std::string predictions =
        "node\tclass\tp_local\tp_cumulative\tthreshold\tdecision\n";
    std::map<std::string, std::set<std::string>> extended;

    for (const auto& root : roots) {
      SubHierarchy sub = load_sub_artifacts(cfg, root);
      fs::path dir = fs::path(cfg.out_dir) / sub_dir_name(root);

      // Row universe: subgraph order by default, whole network when widened.
      std::vector<std::string> rows =
          widened(cfg) ? in.net.node_ids() : sub.row_nodes;
      std::map<std::string, std::size_t> row_of;
      for (std::size_t r = 0; r < rows.size(); ++r) row_of[rows[r]] = r;

      std::map<std::string, std::vector<double>> p_local;
      std::istringstream probs(
          read_text_file((dir / kLocalProbsName).string()));
      std::string line;
      std::getline(probs, line);
      while (std::getline(probs, line)) {
        if (trim(line).empty()) continue;
        auto fields = split(line, '\t');
        if (fields.size() != 3)
          throw PipelineError("predict", root, "malformed local_probs row");
        auto it = row_of.find(fields[0]);
        if (it == row_of.end())
          throw PipelineError("predict", root,
                              "unknown node in local_probs: " + fields[0]);
        auto& v = p_local[fields[1]];
        if (v.empty()) v.assign(rows.size(), 0.0);
        v[it->second] = parse_double(fields[2], "p_local");
      }

      std::map<std::string, double> thresholds;
      std::istringstream status(
          read_text_file((dir / kClassStatusName).string()));
      std::getline(status, line);
      while (std::getline(status, line)) {
        if (trim(line).empty()) continue;
        auto fields = split(line, '\t');
        if (fields.size() < 3)
          throw PipelineError("predict", root, "malformed class_status row");
        if (fields[1] == "skipped") continue;
        thresholds[fields[0]] = parse_double(fields[2], "threshold");
      }

      auto p_cum = cumulative_probabilities(sub.tree, p_local);

      SubHierarchy view = sub;  // decision pass over the chosen row universe
      view.row_nodes = rows;
      DecisionOutput decisions =
          decide_and_extend(view, p_cum, thresholds, in.closed, &p_local);

      for (const auto& rec : decisions.records)
        predictions += rec.node + "\t" + rec.cls + "\t" +
                       format_double(rec.p_local) + "\t" +
                       format_double(rec.p_cum) + "\t" +
                       format_double(rec.threshold) + "\t" +
                       std::to_string(rec.decision) + "\n";
      for (const auto& [node, classes] : decisions.extended)
        extended[node].insert(classes.begin(), classes.end());
    }
    write_text_file((fs::path(cfg.out_dir) / "predictions.tsv").string(),
                    predictions);
    std::string phi_prime;
    for (const auto& [node, classes] : extended)
      for (const auto& cls : classes) phi_prime += node + "\t" + cls + "\n";
    write_text_file(
        (fs::path(cfg.out_dir) / "predicted_annotations.tsv").string(),
        phi_prime);

    record_stage(m, cfg, "predict",
                 {"predictions.tsv", "predicted_annotations.tsv"});
    save_manifest(cfg, m);
    log_info("predict: done");
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError("predict", "", e.what());
  }
}

namespace {

struct LoadedPredictions {
  // per class: aligned score/decision/label rows
  struct PerClass {
    std::vector<double> p_cum;
    std::vector<int> decision;
    std::vector<int> labels;
    double threshold = 0;
  };
  std::map<std::string, PerClass> classes;
};

LoadedPredictions load_predictions(const std::string& path,
                                   const AnnotationMap& closed) {
  LoadedPredictions out;
  std::istringstream in(read_text_file(path));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() < 6)
      throw InputError(path + ": malformed prediction row: " + line);
    auto& pc = out.classes[fields[1]];
    pc.p_cum.push_back(parse_double(fields[3], "p_cumulative"));
    pc.threshold = parse_double(fields[4], "threshold");
    pc.decision.push_back(static_cast<int>(parse_int(fields[5], "decision")));
    pc.labels.push_back(closed.has(fields[0], fields[1]) ? 1 : 0);
  }
  return out;
}

json metrics_for(const LoadedPredictions& preds,
                 const std::map<std::string, std::string>& sub_of_class) {
  json per_class = json::object();
  std::map<std::string, std::vector<double>> f1_by_sub;
  std::map<std::string, std::vector<double>> tpr_by_sub;
  std::map<std::string, std::vector<double>> tnr_by_sub;
  std::map<std::string, std::vector<double>> ap_by_sub;
  std::map<std::string, std::vector<double>> auc_by_sub;

  for (const auto& [cls, pc] : preds.classes) {
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < pc.decision.size(); ++i) {
      if (pc.decision[i])
        pc.labels[i] ? ++cm.tp : ++cm.fp;
      else
        pc.labels[i] ? ++cm.fn : ++cm.tn;
    }
    json entry;
    entry["tp"] = cm.tp;
    entry["fp"] = cm.fp;
    entry["tn"] = cm.tn;
    entry["fn"] = cm.fn;
    entry["precision"] = precision(cm);
    entry["recall"] = tpr(cm);
    entry["tnr"] = (cm.tn + cm.fp) > 0 ? json(tnr(cm)) : json(nullptr);
    entry["f1"] = f1_score(cm);
    entry["threshold"] = pc.threshold;
    bool both = cm.tp + cm.fn > 0 && cm.tn + cm.fp > 0;
    entry["average_precision"] =
        both ? json(average_precision(pc.p_cum, pc.labels)) : json(nullptr);
    entry["roc_auc"] = both ? json(roc_auc(pc.p_cum, pc.labels)) : json(nullptr);

    auto sit = sub_of_class.find(cls);
    std::string sub = sit == sub_of_class.end() ? "" : sit->second;
    std::string key = sub.empty() ? cls : sub + "/" + cls;
    per_class[key] = entry;
    f1_by_sub[sub].push_back(f1_score(cm));
    tpr_by_sub[sub].push_back(tpr(cm));
    if (cm.tn + cm.fp > 0) tnr_by_sub[sub].push_back(tnr(cm));
    if (both) {
      ap_by_sub[sub].push_back(average_precision(pc.p_cum, pc.labels));
      auc_by_sub[sub].push_back(roc_auc(pc.p_cum, pc.labels));
    }
  }

  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  json per_sub = json::object();
  for (const auto& [sub, f1s] : f1_by_sub) {
    json entry;
    entry["classes"] = f1s.size();
    entry["mean_f1"] = mean(f1s);
    entry["mean_recall"] = mean(tpr_by_sub[sub]);
    entry["mean_tnr"] =
        tnr_by_sub[sub].empty() ? json(nullptr) : json(mean(tnr_by_sub[sub]));
    entry["mean_average_precision"] =
        ap_by_sub[sub].empty() ? json(nullptr) : json(mean(ap_by_sub[sub]));
    entry["mean_roc_auc"] =
        auc_by_sub[sub].empty() ? json(nullptr) : json(mean(auc_by_sub[sub]));
    per_sub[sub] = entry;
  }
  json out;
  out["classes"] = per_class;
  out["subhierarchies"] = per_sub;
  return out;
}

std::map<std::string, std::string> class_to_sub(const RunConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& root : read_split_manifest(cfg)) {
    fs::path dir = fs::path(cfg.out_dir) / sub_dir_name(root);
    std::istringstream in(read_text_file((dir / "classes.tsv").string()));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      out[split(line, '\t')[0]] = root;
    }
  }
  return out;
}

}  // namespace

void stage_eval(const RunConfig& cfg) {
  json m = load_manifest(cfg);
  require_stage(m, cfg, "predict", "eval");
  Ingest in = ingest_inputs(cfg, false);
  try {
    fs::path pred = fs::path(cfg.out_dir) / "predictions.tsv";
    if (!fs::exists(pred))
      throw PipelineError("eval", "", "missing artifact predictions.tsv", true);
    auto preds = load_predictions(pred.string(), in.closed);
    auto sub_of = class_to_sub(cfg);
    json metrics = metrics_for(preds, sub_of);
    write_text_file((fs::path(cfg.out_dir) / "metrics.json").string(),
                    metrics.dump(2) + "\n");

    std::vector<std::string> outputs = {"metrics.json"};
    for (const auto& [cls, pc] : preds.classes) {
      bool both = std::count(pc.labels.begin(), pc.labels.end(), 1) > 0 &&
                  std::count(pc.labels.begin(), pc.labels.end(), 0) > 0;
      if (!both) continue;
      auto curve = pr_curve(pc.p_cum, pc.labels);
      std::string sub = sub_of.count(cls) ? sub_of[cls] : "";
      std::string rel = "curves/" + sanitize_for_path(sub) + "__" +
                        sanitize_for_path(cls) + ".csv";
      save_pr_curve_csv(curve, (fs::path(cfg.out_dir) / rel).string());
      outputs.push_back(rel);
    }
    std::sort(outputs.begin(), outputs.end());
    record_stage(m, cfg, "eval", outputs);
    save_manifest(cfg, m);
    log_info("eval: metrics written");
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError("eval", "", e.what());
  }
}

void stage_baseline(const RunConfig& cfg) {
  json m = load_manifest(cfg);
  require_stage(m, cfg, "split", "baseline");
  Ingest in = ingest_inputs(cfg, true);
  fs::path timing = fs::path(cfg.out_dir) / "baseline_timing.tsv";
  if (fs::exists(timing)) fs::remove(timing);
  try {
    auto roots = read_split_manifest(cfg);
    std::vector<std::string> fragments(roots.size());
    parallel_over(roots.size(), cfg.threads, [&](std::size_t i) {
      const std::string& root = roots[i];
      auto start = std::chrono::steady_clock::now();
      try {
        SubHierarchy sub = load_sub_artifacts(cfg, root);
        auto scores = hbn_out_of_fold_scores(sub, in.closed, cfg.k, cfg.seed);

        // Structural pass-throughs keep decision chains intact.
        std::map<std::string, std::vector<double>> p_cum = scores;
        std::map<std::string, double> thresholds;
        for (const auto& cls : sub.classes) {
          if (scores.count(cls)) continue;
          if (sub.targets.count(cls)) continue;  // skipped target: absent
          p_cum[cls].assign(sub.row_nodes.size(), 1.0);
        }
        for (const auto& [cls, s] : p_cum) {
          if (scores.count(cls) == 0) {
            thresholds[cls] = 0.0;
            continue;
          }
          std::vector<int> labels(sub.row_nodes.size());
          for (std::size_t r = 0; r < labels.size(); ++r)
            labels[r] = in.closed.has(sub.row_nodes[r], cls) ? 1 : 0;
          bool both = std::count(labels.begin(), labels.end(), 1) > 0 &&
                      std::count(labels.begin(), labels.end(), 0) > 0;
          thresholds[cls] = both ? optimum_threshold(s, labels) : 0.0;
        }
        // The ratio reconstruction recovers each class's own posterior
        // factor from the path product.
        DecisionOutput decisions =
            decide_and_extend(sub, p_cum, thresholds, in.closed);
        std::string rows;
        for (const auto& rec : decisions.records)
          rows += rec.node + "\t" + rec.cls + "\t" + format_double(rec.p_local) +
                  "\t" + format_double(rec.p_cum) + "\t" +
                  format_double(rec.threshold) + "\t" +
                  std::to_string(rec.decision) + "\thbn\n";
        fragments[i] = rows;
        append_timing(cfg, "baseline_timing.tsv", root, seconds_since(start));
        log_info("baseline: " + root + " done");
      } catch (const PipelineError&) {
        throw;
      } catch (const std::exception& e) {
        throw PipelineError("baseline", root, e.what());
      }
    });

    std::string predictions =
        "node\tclass\tp_local\tp_cumulative\tthreshold\tdecision\tmodel\n";
    for (const auto& fragment : fragments) predictions += fragment;
    write_text_file(
        (fs::path(cfg.out_dir) / "baseline_predictions.tsv").string(),
        predictions);

    auto preds = load_predictions(
        (fs::path(cfg.out_dir) / "baseline_predictions.tsv").string(),
        in.closed);
    json metrics = metrics_for(preds, class_to_sub(cfg));
    write_text_file((fs::path(cfg.out_dir) / "baseline_metrics.json").string(),
                    metrics.dump(2) + "\n");

    record_stage(m, cfg, "baseline",
                 {"baseline_predictions.tsv", "baseline_metrics.json"});
    save_manifest(cfg, m);
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError("baseline", "", e.what());
  }
}

void run_pipeline(const RunConfig& cfg) {
  struct StageTime {
    std::string name;
    double seconds;
  };
  std::vector<StageTime> stage_times;
  auto timed = [&](const std::string& name, const std::function<void()>& fn) {
    auto start = std::chrono::steady_clock::now();
    fn();
    stage_times.push_back({name, seconds_since(start)});
  };

  timed("normalize", [&] { stage_normalize(cfg); });
  timed("split", [&] { stage_split(cfg); });
  timed("features", [&] { stage_features(cfg); });
  timed("embed", [&] { stage_embed(cfg); });
  timed("train", [&] { stage_train(cfg); });
  timed("predict", [&] { stage_predict(cfg); });
  timed("eval", [&] { stage_eval(cfg); });
  if (cfg.run_baseline) timed("baseline", [&] { stage_baseline(cfg); });

  // Timing report: per-stage wall clock, per-sub-hierarchy engine seconds,
  // and the engine-vs-baseline table when the baseline ran. The ratio is
  // reported, never asserted; absolute numbers are hardware-dependent.
  std::string report = "section\titem\tseconds\n";
  for (const auto& st : stage_times)
    report += "stage\t" + st.name + "\t" + format_double(st.seconds) + "\n";

  auto read_timings = [&](const std::string& file) {
    std::map<std::string, double> out;
    fs::path p = fs::path(cfg.out_dir) / file;
    if (!fs::exists(p)) return out;
    std::istringstream in(read_text_file(p.string()));
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      auto fields = split(line, '\t');
      out[fields[0]] = parse_double(fields[1], file);
    }
    return out;
  };
  auto engine_times = read_timings("train_timing.tsv");
  for (const auto& [root, sec] : engine_times)
    report += "sub\t" + root + "\t" + format_double(sec) + "\n";

  if (cfg.run_baseline) {
    auto hbn_times = read_timings("baseline_timing.tsv");
    report += "# engine vs hbn per sub-hierarchy\n";
    report += "compare\troot\tengine_seconds\thbn_seconds\tratio\n";
    double ratio_sum = 0;
    std::size_t ratio_count = 0;
    for (const auto& [root, engine_sec] : engine_times) {
      auto it = hbn_times.find(root);
      if (it == hbn_times.end()) continue;
      double ratio = engine_sec > 0 ? it->second / engine_sec : 0.0;
      report += "compare\t" + root + "\t" + format_double(engine_sec) + "\t" +
                format_double(it->second) + "\t" + format_double(ratio) + "\n";
      ratio_sum += ratio;
      ++ratio_count;
    }
    if (ratio_count > 0)
      report += "summary\tmean_hbn_over_engine_ratio\t" +
                format_double(ratio_sum / static_cast<double>(ratio_count)) +
                "\n";
  }
  write_text_file((fs::path(cfg.out_dir) / "timing_report.tsv").string(),
                  report);
  log_info("run: complete");
}

}  // namespace hmc
