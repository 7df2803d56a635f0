#include "srugc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace srugc {

namespace {

void check_shapes(Eigen::Index rows, Eigen::Index cols, const GroundTruthAdjacency& truth) {
  if (rows != truth.edges.rows() || cols != truth.edges.cols() || rows != cols)
    throw Error("prediction shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                " does not match truth shape " + std::to_string(truth.edges.rows()) + "x" +
                std::to_string(truth.edges.cols()));
}

}  // namespace

Confusion confusion(const Eigen::MatrixXi& pred, const GroundTruthAdjacency& truth,
                    bool exclude_self) {
  check_shapes(pred.rows(), pred.cols(), truth);
  Confusion c;
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    for (Eigen::Index j = 0; j < pred.cols(); ++j) {
      if (exclude_self && i == j) continue;
      const bool p = pred(i, j) != 0;
      const bool t = truth.edges(i, j) != 0;
      if (p && t) ++c.tp;
      else if (p) ++c.fp;
      else if (t) ++c.fn;
      else ++c.tn;
    }
  }
  return c;
}

RocCurve make_roc(std::vector<RocPoint> points, bool anchors) {
  if (anchors) {
    points.push_back({0.0, 0.0});
    points.push_back({1.0, 1.0});
  }
  std::sort(points.begin(), points.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fpr != b.fpr ? a.fpr < b.fpr : a.tpr < b.tpr;
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  RocCurve roc;
  roc.points = std::move(points);
  for (std::size_t k = 1; k < roc.points.size(); ++k) {
    const auto& a = roc.points[k - 1];
    const auto& b = roc.points[k];
    roc.auroc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return roc;
}

RocCurve roc_from_graphs(const std::vector<Eigen::MatrixXi>& graphs,
                         const GroundTruthAdjacency& truth, bool exclude_self, bool anchors) {
  std::vector<RocPoint> pts;
  for (const auto& g : graphs) {
    const Confusion c = confusion(g, truth, exclude_self);
    pts.push_back({c.fpr(), c.tpr()});
  }
  return make_roc(std::move(pts), anchors);
}

RocCurve roc_from_sweep(const SweepResult& sweep, const GroundTruthAdjacency& truth,
                        bool exclude_self, bool anchors) {
  if (sweep.points.empty()) throw Error("sweep has no grid points");
  std::vector<Eigen::MatrixXi> graphs;
  for (const auto& pt : sweep.points)
    if (pt.ok()) graphs.push_back(pt.adjacency.binary());
  return roc_from_graphs(graphs, truth, exclude_self, anchors);
}

RocCurve roc_from_scores(const Eigen::MatrixXd& scores, const GroundTruthAdjacency& truth,
                         bool exclude_self) {
  check_shapes(scores.rows(), scores.cols(), truth);
  if (!scores.allFinite()) throw Error("scores must be finite");
  std::vector<double> thresholds;
  for (Eigen::Index i = 0; i < scores.rows(); ++i)
    for (Eigen::Index j = 0; j < scores.cols(); ++j)
      if (!(exclude_self && i == j)) thresholds.push_back(scores(i, j));
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<RocPoint> pts;
  for (double th : thresholds) {
    const Eigen::MatrixXi pred = (scores.array() >= th).cast<int>();
    const Confusion c = confusion(pred, truth, exclude_self);
    pts.push_back({c.fpr(), c.tpr()});
  }
  return make_roc(std::move(pts), true);
}

MeanStd mean_and_std(const std::vector<double>& values) {
  if (values.empty()) throw Error("cannot average an empty list");
  MeanStd out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace srugc
