#include "hmc/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hmc/util.hpp"

namespace hmc {

namespace {

void check_lengths(const std::vector<double>& scores,
                   const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw std::invalid_argument("scores and labels must be non-empty and equal-length");
}

// Indices sorted by score descending; throws when a class is missing.
std::vector<std::size_t> ranked_indices(const std::vector<double>& scores,
                                        const std::vector<int>& labels,
                                        std::int64_t& positives,
                                        std::int64_t& negatives) {
  check_lengths(scores, labels);
  positives = std::count(labels.begin(), labels.end(), 1);
  negatives = static_cast<std::int64_t>(labels.size()) - positives;
  if (positives == 0 || negatives == 0)
    throw std::invalid_argument("both label values must be present");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return idx;
}

}  // namespace

ConfusionMatrix confusion(const std::vector<double>& scores,
                          const std::vector<int>& labels, double threshold) {
  check_lengths(scores, labels);
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    bool predicted = scores[i] >= threshold;
    if (predicted)
      labels[i] == 1 ? ++cm.tp : ++cm.fp;
    else
      labels[i] == 1 ? ++cm.fn : ++cm.tn;
  }
  return cm;
}

double precision(const ConfusionMatrix& cm) {
  std::int64_t denom = cm.tp + cm.fp;
  return denom == 0 ? 1.0 : static_cast<double>(cm.tp) / static_cast<double>(denom);
}

double tpr(const ConfusionMatrix& cm) {
  std::int64_t denom = cm.tp + cm.fn;
  return denom == 0 ? 0.0 : static_cast<double>(cm.tp) / static_cast<double>(denom);
}

double tnr(const ConfusionMatrix& cm) {
  std::int64_t denom = cm.tn + cm.fp;
  return denom == 0 ? 0.0 : static_cast<double>(cm.tn) / static_cast<double>(denom);
}

double f1_score(const ConfusionMatrix& cm) {
  double p = precision(cm);
  double r = tpr(cm);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

std::vector<PrPoint> pr_curve(const std::vector<double>& scores,
                              const std::vector<int>& labels) {
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
  const auto idx = ranked_indices(scores, labels, positives, negatives);

  std::vector<PrPoint> curve;
  curve.push_back({std::numeric_limits<double>::infinity(), 1.0, 0.0});
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    double t = scores[idx[i]];
    // Tied scores collapse into a single threshold step.
    while (i < idx.size() && scores[idx[i]] == t) {
      labels[idx[i]] == 1 ? ++tp : ++fp;
      ++i;
    }
    double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
    double r = static_cast<double>(tp) / static_cast<double>(positives);
    curve.push_back({t, p, r});
  }
  return curve;
}

std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                const std::vector<int>& labels) {
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
  const auto idx = ranked_indices(scores, labels, positives, negatives);

  std::vector<RocPoint> curve;
  curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    double t = scores[idx[i]];
    while (i < idx.size() && scores[idx[i]] == t) {
      labels[idx[i]] == 1 ? ++tp : ++fp;
      ++i;
    }
    curve.push_back({t, static_cast<double>(fp) / static_cast<double>(negatives),
                     static_cast<double>(tp) / static_cast<double>(positives)});
  }
  return curve;
}

double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& labels) {
  const auto curve = pr_curve(scores, labels);
  double ap = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    ap += (curve[i].recall - curve[i - 1].recall) * curve[i].precision;
  return ap;
}

double roc_auc(const std::vector<double>& scores,
               const std::vector<int>& labels) {
  const auto curve = roc_curve(scores, labels);
  double auc = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    auc += (curve[i].fpr - curve[i - 1].fpr) *
           (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  return auc;
}

void save_pr_curve_csv(const std::vector<PrPoint>& curve,
                       const std::string& path) {
  std::string out = "threshold,precision,recall\n";
  for (const auto& pt : curve)
    out += format_double(pt.threshold) + "," + format_double(pt.precision) +
           "," + format_double(pt.recall) + "\n";
  write_text_file(path, out);
}

}  // namespace hmc
