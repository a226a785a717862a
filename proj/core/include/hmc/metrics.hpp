#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hmc {

struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
};

// decision = score >= threshold
ConfusionMatrix confusion(const std::vector<double>& scores,
                          const std::vector<int>& labels, double threshold);

double precision(const ConfusionMatrix& cm);  // 1.0 when nothing is predicted
double tpr(const ConfusionMatrix& cm);        // recall
double tnr(const ConfusionMatrix& cm);
double f1_score(const ConfusionMatrix& cm);   // 0 when P + R = 0

struct PrPoint {
  double threshold;  // +inf for the recall-0 anchor
  double precision;
  double recall;
};

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

// Thresholds strictly decreasing, one step per distinct score; the first
// point anchors recall 0 at precision 1.
std::vector<PrPoint> pr_curve(const std::vector<double>& scores,
                              const std::vector<int>& labels);

std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                const std::vector<int>& labels);

// Step-wise (non-interpolated): sum of (R_i - R_{i-1}) * P_i.
double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& labels);

// Trapezoidal rule over the tie-collapsed ROC curve; equals
// (concordant + 0.5 * tied) / (positives * negatives).
double roc_auc(const std::vector<double>& scores,
               const std::vector<int>& labels);

void save_pr_curve_csv(const std::vector<PrPoint>& curve,
                       const std::string& path);

}  // namespace hmc
