// Scoring inferred graphs against ground truth.

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "srugc/datagen.hpp"
#include "srugc/infer.hpp"

namespace srugc {

struct Confusion {
  long tp = 0, fp = 0, tn = 0, fn = 0;

  long positives() const { return tp + fn; }
  long negatives() const { return fp + tn; }
  double tpr() const { return positives() > 0 ? static_cast<double>(tp) / positives() : 0.0; }
  double fpr() const { return negatives() > 0 ? static_cast<double>(fp) / negatives() : 0.0; }
};

/// Counts over all n^2 ordered pairs, or the n^2 - n off-diagonal pairs.
Confusion confusion(const Eigen::MatrixXi& pred, const GroundTruthAdjacency& truth,
                    bool exclude_self);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
  std::vector<RocPoint> points;  // sorted by (fpr, tpr), deduplicated
  double auroc = 0.0;
};

/// Sorts, deduplicates and integrates by the trapezoid rule.
RocCurve make_roc(std::vector<RocPoint> points, bool anchors = true);

/// One operating point per binary graph, plus (0,0) and (1,1) anchors.
RocCurve roc_from_graphs(const std::vector<Eigen::MatrixXi>& graphs,
                         const GroundTruthAdjacency& truth, bool exclude_self,
                         bool anchors = true);

/// ROC of a lambda sweep; grid points with failed components are skipped.
RocCurve roc_from_sweep(const SweepResult& sweep, const GroundTruthAdjacency& truth,
                        bool exclude_self, bool anchors = true);

/// Threshold sweep over the distinct values of one score matrix; an edge is
/// predicted when its score is >= the threshold.
RocCurve roc_from_scores(const Eigen::MatrixXd& scores, const GroundTruthAdjacency& truth,
                         bool exclude_self);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single value
};

MeanStd mean_and_std(const std::vector<double>& values);

}  // namespace srugc
