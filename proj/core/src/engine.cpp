#include "hmc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hmc/metrics.hpp"
#include "hmc/random.hpp"

namespace hmc {

const char* to_string(ClassStatus s) {
  switch (s) {
    case ClassStatus::trained: return "trained";
    case ClassStatus::structural: return "structural";
    case ClassStatus::saturated: return "saturated";
    case ClassStatus::skipped: return "skipped";
  }
  return "?";
}

std::uint64_t fold_seed_for(std::uint64_t master, const std::string& sub_root,
                            const std::string& cls) {
  return derive_seed(derive_seed(master, "sub:" + sub_root), "folds:" + cls);
}

namespace {

Matrix select_rows(const Matrix& X, const std::vector<std::size_t>& idx) {
  Matrix out(idx.size(), X.cols);
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy_n(X.row(idx[i]), X.cols, out.row(i));
  return out;
}

std::vector<int> select_labels(const std::vector<int>& y,
                               const std::vector<std::size_t>& idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = y[idx[i]];
  return out;
}

// External adapter contract: the engine dumps `node  split  label  features…`
// and expects `node<TAB>probability` back, one line per test row, in order.
std::vector<double> run_external_adapter(const ClassDataset& ds,
                                         const std::vector<std::size_t>& train_idx,
                                         const std::vector<std::size_t>& test_idx,
                                         const std::string& cmd,
                                         const std::string& work_dir,
                                         const std::string& tag) {
  namespace fs = std::filesystem;
  fs::path dir = work_dir.empty() ? fs::temp_directory_path() : fs::path(work_dir);
  fs::create_directories(dir);
  fs::path in_path = dir / ("adapter_" + tag + "_in.tsv");
  fs::path out_path = dir / ("adapter_" + tag + "_out.tsv");

  std::string out = "node\tsplit\tlabel";
  for (const auto& name : ds.column_names) out += "\t" + name;
  out += "\n";
  auto emit = [&](std::size_t r, const char* splitname) {
    out += ds.node_ids[r];
    out += "\t";
    out += splitname;
    out += "\t" + std::to_string(ds.labels[r]);
    for (std::size_t c = 0; c < ds.X.cols; ++c)
      out += "\t" + format_double(ds.X.at(r, c));
    out += "\n";
  };
  for (std::size_t r : train_idx) emit(r, "train");
  for (std::size_t r : test_idx) emit(r, "test");
  write_text_file(in_path.string(), out);

  std::string invocation = cmd + " '" + in_path.string() + "' '" +
                           out_path.string() + "'";
  int rc = std::system(invocation.c_str());
  if (rc != 0)
    throw std::runtime_error("external classifier command failed (exit " +
                             std::to_string(rc) + ")");

  std::istringstream result(read_text_file(out_path.string()));
  std::vector<double> probs;
  std::string line;
  while (std::getline(result, line)) {
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2)
      throw std::runtime_error("adapter output row malformed: '" + line + "'");
    double p = parse_double(fields[1], "adapter output");
    if (p < 0.0 || p > 1.0)
      throw std::runtime_error("adapter probability out of [0,1]: " +
                               fields[1]);
    probs.push_back(p);
  }
  if (probs.size() != test_idx.size())
    throw std::runtime_error("adapter returned " + std::to_string(probs.size()) +
                             " probabilities for " +
                             std::to_string(test_idx.size()) + " test rows");
  return probs;
}

}  // namespace

std::map<std::string, std::vector<double>> cumulative_probabilities(
    const TreeHierarchy& tree,
    const std::map<std::string, std::vector<double>>& p_local) {
  std::map<std::string, std::vector<double>> p_cum;
  for (int idx : tree.topological_order()) {
    const std::string& cls = tree.class_ids[idx];
    auto it = p_local.find(cls);
    if (it == p_local.end()) continue;
    int parent = tree.parent[idx];
    if (parent < 0) {
      p_cum[cls] = it->second;
      continue;
    }
    auto pit = p_cum.find(tree.class_ids[parent]);
    if (pit == p_cum.end())
      throw std::invalid_argument("missing ancestor probability for class '" +
                                  cls + "'");
    if (pit->second.size() != it->second.size())
      throw std::invalid_argument("probability vector length mismatch for '" +
                                  cls + "'");
    std::vector<double> cum(it->second.size());
    for (std::size_t r = 0; r < cum.size(); ++r)
      cum[r] = pit->second[r] * it->second[r];
    p_cum[cls] = std::move(cum);
  }
  return p_cum;
}

double optimum_threshold(const std::vector<double>& scores,
                         const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw std::invalid_argument("scores and labels must be non-empty and equal-length");
  std::int64_t positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || positives == static_cast<std::int64_t>(labels.size()))
    throw std::invalid_argument("both label values must be present");

  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  double best_f1 = -1.0;
  double best_t = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    double t = scores[idx[i]];
    while (i < idx.size() && scores[idx[i]] == t) {
      labels[idx[i]] == 1 ? ++tp : ++fp;
      ++i;
    }
    std::int64_t fn = positives - tp;
    double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
    double r = static_cast<double>(tp) / static_cast<double>(tp + fn);
    double f1 = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    if (f1 > best_f1 || (f1 == best_f1 && t < best_t)) {
      best_f1 = f1;
      best_t = t;
    }
  }
  return best_t;
}

std::vector<ClassResult> train_subhierarchy(const SubHierarchy& sub,
                                            const FeatureBundle& fb,
                                            const AnnotationMap& closed,
                                            const EngineConfig& cfg) {
  if (sub.targets.empty())
    throw std::invalid_argument("sub-hierarchy has no target class");
  const std::size_t n_rows = sub.row_nodes.size();
  const std::vector<ClassifierConfig> grid =
      cfg.grid.empty() ? default_grid() : cfg.grid;

  std::vector<ClassResult> results;
  results.reserve(sub.classes.size());
  std::map<std::string, std::size_t> result_index;

  for (int local : sub.tree.topological_order()) {
    const std::string& cls = sub.tree.class_ids[local];
    ClassResult res;
    res.class_id = cls;
    res.labels.resize(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r)
      res.labels[r] = closed.has(sub.row_nodes[r], cls) ? 1 : 0;
    const std::size_t positives =
        static_cast<std::size_t>(std::count(res.labels.begin(), res.labels.end(), 1));
    const std::size_t negatives = n_rows - positives;

    int parent = sub.tree.parent[local];
    const ClassResult* parent_res = nullptr;
    if (parent >= 0) {
      auto it = result_index.find(sub.tree.class_ids[parent]);
      if (it != result_index.end()) parent_res = &results[it->second];
    }

    if (parent_res != nullptr && parent_res->status == ClassStatus::skipped) {
      res.status = ClassStatus::skipped;
      res.note = "ancestor '" + parent_res->class_id + "' was skipped";
      result_index[cls] = results.size();
      results.push_back(std::move(res));
      continue;
    }

    const bool is_target = sub.targets.count(cls) > 0;
    std::vector<double> parent_cum;
    if (parent_res != nullptr) parent_cum = parent_res->p_cum;

    if (!is_target) {
      res.status = ClassStatus::structural;
      res.p_local.assign(n_rows, 1.0);
    } else if (positives < static_cast<std::size_t>(cfg.k)) {
      // Fixing p_local at 1 below an untrainable class would inflate its
      // descendants, so the whole branch is dropped instead.
      res.status = ClassStatus::skipped;
      res.note = "insufficient positives in subgraph (" +
                 std::to_string(positives) + " < " + std::to_string(cfg.k) + ")";
      result_index[cls] = results.size();
      results.push_back(std::move(res));
      continue;
    } else if (negatives < static_cast<std::size_t>(cfg.k)) {
      // Near-universal membership in the candidate set: a unit local
      // probability is the honest estimate, and descendants remain trainable.
      res.status = ClassStatus::saturated;
      res.note = "insufficient negatives in subgraph (" +
                 std::to_string(negatives) + " < " + std::to_string(cfg.k) + ")";
      res.p_local.assign(n_rows, 1.0);
    } else {
      res.status = ClassStatus::trained;
      ClassDataset ds = build_dataset(
          sub, fb, closed, cls,
          parent_res == nullptr ? nullptr : &parent_cum);
      const std::uint64_t class_seed =
          derive_seed(cfg.seed, "sub:" + sub.root + "/class:" + cls);
      FoldAssignment folds =
          stratified_kfold(ds.labels, cfg.k, fold_seed_for(cfg.seed, sub.root, cls));
      res.fold_of_row.assign(folds.fold.begin(), folds.fold.end());

      if (cfg.classifier_kind == ClassifierKind::external) {
        ClassifierConfig chosen;
        chosen.kind = ClassifierKind::external;
        chosen.external_cmd = cfg.external_cmd;
        res.chosen = chosen;
        res.p_local.assign(n_rows, 0.0);
        for (int f = 0; f < cfg.k; ++f) {
          auto train_idx = folds.train_rows(f);
          auto test_idx = folds.test_rows(f);
          auto probs = run_external_adapter(
              ds, train_idx, test_idx, cfg.external_cmd, cfg.work_dir,
              sanitize_for_path(sub.root + "_" + cls + "_f" + std::to_string(f)));
          for (std::size_t i = 0; i < test_idx.size(); ++i)
            res.p_local[test_idx[i]] = probs[i];
        }
      } else {
        HyperGrid hyper{grid};
        for (auto& cand : hyper.candidates)
          cand.seed = derive_seed(class_seed, "grid");
        const SmoteConfig* smote_ptr = nullptr;
        SmoteConfig smote_cfg = cfg.smote;
        if (cfg.use_smote) {
          smote_cfg.seed = derive_seed(class_seed, "smote");
          smote_ptr = &smote_cfg;
        }
        res.chosen = tune(ds.X, ds.labels, hyper, folds, smote_ptr);

        res.p_local.assign(n_rows, 0.0);
        for (int f = 0; f < cfg.k; ++f) {
          auto train_idx = folds.train_rows(f);
          auto test_idx = folds.test_rows(f);
          Matrix Xtr = select_rows(ds.X, train_idx);
          std::vector<int> ytr = select_labels(ds.labels, train_idx);
          if (cfg.use_smote) {
            SmoteConfig sc = smote_cfg;
            sc.seed = derive_seed(smote_cfg.seed, "final-fold", f);
            auto provenance = augment_with_smote(Xtr, ytr, sc);
            // Synthetic rows are appended to the training split only; the
            // held-out rows keep their original provenance.
            for (std::size_t i = 0; i < train_idx.size(); ++i)
              if (provenance[i])
                throw std::logic_error("SMOTE rewrote an original row");
          }
          ClassifierConfig fit_cfg = res.chosen;
          fit_cfg.seed = derive_seed(class_seed, "fit", f);
          TrainedModel model = train(Xtr, ytr, fit_cfg, ds.schema_hash);
          Matrix Xte = select_rows(ds.X, test_idx);
          auto probs = predict_proba(model, Xte, ds.schema_hash);
          for (std::size_t i = 0; i < test_idx.size(); ++i)
            res.p_local[test_idx[i]] = probs[i];
          FoldSummary fs;
          fs.fold = f;
          fs.test_rows = test_idx.size();
          std::vector<int> yte = select_labels(ds.labels, test_idx);
          if (std::count(yte.begin(), yte.end(), 1) > 0 &&
              std::count(yte.begin(), yte.end(), 0) > 0)
            fs.average_precision = average_precision(probs, yte);
          res.fold_summaries.push_back(fs);
          res.fold_models.push_back(std::move(model));
        }
      }
    }

    // Cumulative probabilities stitch through the parent chain.
    res.p_cum.resize(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r)
      res.p_cum[r] = (parent_res == nullptr ? 1.0 : parent_cum[r]) * res.p_local[r];

    if (res.status == ClassStatus::trained) {
      res.threshold = optimum_threshold(res.p_cum, res.labels);
    } else {
      res.threshold = 0.0;  // always-open gate
    }
    result_index[cls] = results.size();
    results.push_back(std::move(res));
  }
  return results;
}

DecisionOutput decide_and_extend(
    const SubHierarchy& sub,
    const std::map<std::string, std::vector<double>>& p_cum,
    const std::map<std::string, double>& thresholds,
    const AnnotationMap& closed,
    const std::map<std::string, std::vector<double>>* p_local) {
  DecisionOutput out;
  const std::size_t n_rows = sub.row_nodes.size();

  std::map<std::string, std::vector<char>> decision;
  std::map<std::string, std::vector<double>> local_part;

  for (int local : sub.tree.topological_order()) {
    const std::string& cls = sub.tree.class_ids[local];
    auto tit = thresholds.find(cls);
    if (tit == thresholds.end()) continue;  // skipped class: never fires
    auto pit = p_cum.find(cls);
    if (pit == p_cum.end())
      throw std::invalid_argument("thresholded class '" + cls +
                                  "' has no cumulative probabilities");
    if (pit->second.size() != n_rows)
      throw std::invalid_argument("cumulative vector length mismatch for '" +
                                  cls + "'");
    int parent = sub.tree.parent[local];
    const std::vector<char>* parent_dec = nullptr;
    if (parent >= 0) {
      auto dit = decision.find(sub.tree.class_ids[parent]);
      if (dit != decision.end()) parent_dec = &dit->second;
    }
    std::vector<char> dec(n_rows, 0);
    for (std::size_t r = 0; r < n_rows; ++r) {
      bool own = pit->second[r] >= tit->second;
      bool up = parent_dec == nullptr ? true : (*parent_dec)[r] != 0;
      dec[r] = own && up ? 1 : 0;
    }
    decision[cls] = std::move(dec);
  }

  // Emit records for target classes, in sub-hierarchy topological order.
  for (int local : sub.tree.topological_order()) {
    const std::string& cls = sub.tree.class_ids[local];
    if (sub.targets.count(cls) == 0) continue;
    auto dit = decision.find(cls);
    if (dit == decision.end()) continue;  // skipped target
    const auto& cum = p_cum.at(cls);
    double threshold = thresholds.at(cls);
    int parent = sub.tree.parent[local];
    const std::vector<double>* parent_cum = nullptr;
    if (parent >= 0) {
      auto pit = p_cum.find(sub.tree.class_ids[parent]);
      if (pit != p_cum.end()) parent_cum = &pit->second;
    }
    const std::vector<double>* locals = nullptr;
    if (p_local != nullptr) {
      auto lit = p_local->find(cls);
      if (lit != p_local->end() && lit->second.size() == n_rows)
        locals = &lit->second;
    }
    for (std::size_t r = 0; r < n_rows; ++r) {
      PredictionRecord rec;
      rec.node = sub.row_nodes[r];
      rec.cls = cls;
      rec.p_cum = cum[r];
      if (locals != nullptr) {
        rec.p_local = (*locals)[r];
      } else {
        double up = parent_cum == nullptr ? 1.0 : (*parent_cum)[r];
        rec.p_local = up > 0 ? cum[r] / up : 0.0;
      }
      rec.threshold = threshold;
      rec.decision = dit->second[r];
      out.records.push_back(std::move(rec));
    }
  }

  // phi-prime: closure restricted to sub scope, extended by decisions.
  std::set<std::string> scope(sub.classes.begin(), sub.classes.end());
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::string& node = sub.row_nodes[r];
    auto& classes = out.extended[node];
    if (const auto* known = closed.classes_of(node))
      for (const auto& cls : *known)
        if (scope.count(cls)) classes.insert(cls);
    for (const auto& [cls, dec] : decision)
      if (dec[r]) classes.insert(cls);
  }

  // True-path consistency is structural; verify it anyway.
  for (const auto& [cls, dec] : decision) {
    int local = sub.tree.require(cls);
    int parent = sub.tree.parent[local];
    if (parent < 0) continue;
    auto pit = decision.find(sub.tree.class_ids[parent]);
    for (std::size_t r = 0; r < n_rows; ++r)
      if (dec[r] && (pit == decision.end() || !pit->second[r]))
        throw std::logic_error("true-path violation for class '" + cls + "'");
  }
  return out;
}

SubRunResult run_subhierarchy(const SubHierarchy& sub, const FeatureBundle& fb,
                              const AnnotationMap& closed,
                              const EngineConfig& cfg) {
  SubRunResult out;
  out.root = sub.root;
  out.classes = train_subhierarchy(sub, fb, closed, cfg);

  std::map<std::string, std::vector<double>> p_cum;
  std::map<std::string, double> thresholds;
  for (const auto& res : out.classes) {
    if (res.status == ClassStatus::skipped) continue;
    p_cum[res.class_id] = res.p_cum;
    thresholds[res.class_id] = res.threshold;
  }
  std::map<std::string, std::vector<double>> p_local;
  for (const auto& res : out.classes) {
    if (res.status == ClassStatus::skipped) continue;
    p_local[res.class_id] = res.p_local;
  }
  out.decisions = decide_and_extend(sub, p_cum, thresholds, closed, &p_local);

  // Cumulative probabilities are non-increasing along every path.
  for (const auto& res : out.classes) {
    if (res.status == ClassStatus::skipped) continue;
    int local = sub.tree.require(res.class_id);
    int parent = sub.tree.parent[local];
    if (parent < 0) continue;
    auto pit = p_cum.find(sub.tree.class_ids[parent]);
    if (pit == p_cum.end()) continue;
    for (std::size_t r = 0; r < res.p_cum.size(); ++r)
      if (res.p_cum[r] > pit->second[r] + 1e-12)
        throw std::logic_error("cumulative probability exceeded its ancestor");
  }
  return out;
}

std::map<std::string, std::vector<double>> widened_local_probs(
    const SubHierarchy& sub, const FeatureBundle& fb,
    const AnnotationMap& closed, const std::vector<ClassResult>& results) {
  const std::size_t n_all = fb.net->node_count();

  std::map<std::string, std::vector<double>> out;
  std::map<std::string, std::vector<double>> cum_all;
  std::map<std::string, const ClassResult*> by_class;
  for (const auto& res : results) by_class[res.class_id] = &res;

  // `results` is in topological order, so a parent's widened cumulative
  // vector exists before any of its children need it.
  for (const auto& res : results) {
    if (res.status == ClassStatus::skipped) continue;
    int local = sub.tree.require(res.class_id);
    int parent = sub.tree.parent[local];
    const std::vector<double>* parent_cum_all = nullptr;
    if (parent >= 0) parent_cum_all = &cum_all.at(sub.tree.class_ids[parent]);

    std::vector<double> p(n_all, 1.0);
    if (res.status == ClassStatus::trained && !res.fold_models.empty()) {
      std::vector<double> parent_cum_rows(sub.row_nodes.size(), 1.0);
      if (parent >= 0)
        parent_cum_rows = by_class.at(sub.tree.class_ids[parent])->p_cum;
      ClassDataset ds = build_dataset(sub, fb, closed, res.class_id,
                                      parent < 0 ? nullptr : &parent_cum_rows);

      // Full-network design matrix under the training schema; the topological
      // block reuses the dataset's standardization parameters.
      const std::size_t topo_cols = ds.topo_mean.size();
      const int dim = fb.embeddings->dimension;
      std::vector<double> ratio_self =
          neighborhood_class_ratio(*fb.net, closed, res.class_id);
      std::vector<double> ratio_parent(n_all, 1.0);
      if (parent >= 0)
        ratio_parent = neighborhood_class_ratio(*fb.net, closed,
                                                sub.tree.class_ids[parent]);
      Matrix X(n_all, ds.X.cols);
      for (NodeId v = 0; v < n_all; ++v) {
        double* row = X.row(v);
        for (std::size_t c = 0; c < topo_cols; ++c) {
          double raw = fb.features->value(v, c);
          row[c] = ds.topo_std[c] > 0 ? (raw - ds.topo_mean[c]) / ds.topo_std[c]
                                      : 0.0;
        }
        const double* e = fb.embeddings->vec(fb.net->node_id(v));
        for (int d = 0; d < dim; ++d) row[topo_cols + d] = e[d];
        row[topo_cols + dim] = ratio_self[v];
        row[topo_cols + dim + 1] = ratio_parent[v];
        row[topo_cols + dim + 2] =
            parent_cum_all == nullptr ? 1.0 : (*parent_cum_all)[v];
      }
      std::vector<double> mean(n_all, 0.0);
      for (const auto& model : res.fold_models) {
        auto probs = predict_proba(model, X, ds.schema_hash);
        for (std::size_t i = 0; i < n_all; ++i) mean[i] += probs[i];
      }
      for (double& m : mean) m /= static_cast<double>(res.fold_models.size());
      p = std::move(mean);
      // Training rows keep their out-of-fold values.
      for (std::size_t r = 0; r < sub.row_nodes.size(); ++r)
        p[fb.net->require(sub.row_nodes[r])] = res.p_local[r];
    }

    std::vector<double> cum(n_all);
    for (std::size_t v = 0; v < n_all; ++v)
      cum[v] = (parent_cum_all == nullptr ? 1.0 : (*parent_cum_all)[v]) * p[v];
    cum_all[res.class_id] = std::move(cum);
    out[res.class_id] = std::move(p);
  }
  return out;
}

}  // namespace hmc
