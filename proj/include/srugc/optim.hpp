// Proximal gradient training of one component predictor.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "srugc/datagen.hpp"
#include "srugc/model.hpp"

namespace srugc {

struct TrainConfig {
  double lambda1 = 0.0;    // group penalty on W_in columns
  double lambda2 = 0.0;    // group penalty on W_o multi-scale groups (eSRU)
  double ridge = 0.0;      // squared-norm penalty on every other trainable weight
  double step_size = 0.01;
  int epochs = 2000;
  int segment_length = 125;  // truncated-BPTT segment; one update per segment
  std::uint64_t seed = 0;
  bool ablation_ridge_wo = false;  // eSRU: ridge instead of group penalty on W_o
  bool ablation_train_dr = false;  // eSRU: train the encoder (ridge-updated)

  void validate() const;
};

/// Contiguous piece of one sequence, stored time-major (n x L).
struct Segment {
  Eigen::MatrixXd x;
};

/// Cuts every sequence into non-overlapping pieces of `segment_length`;
/// a trailing remnant is kept when it has at least 2 samples.
std::vector<Segment> cut_segments(const TimeSeriesDataset& ds, int segment_length);

struct LossParts {
  double mse = 0.0;
  double group_in = 0.0;
  double group_out = 0.0;
  double ridge = 0.0;
  double total() const { return mse + group_in + group_out + ridge; }
};

/// Penalty terms only (mse left at zero).
LossParts penalties(const ModelParams& p, const TrainConfig& cfg);

/// Mean squared one-step error over all predicted steps of all segments,
/// plus the penalty terms.
LossParts penalized_loss(const ModelParams& p, const std::vector<Segment>& segments,
                         Eigen::Index target, const TrainConfig& cfg);

/// One proximal gradient update: gradient step with ridge on unpenalized
/// parameters, group soft-thresholding on W_in columns and (eSRU) on the
/// W_o groups G_{j,k}.
void prox_step(ModelParams& p, const ModelParams& grads, const TrainConfig& cfg);

struct EpochStats {
  double mse = 0.0;        // mean over the epoch's updates, before each update
  double penalized = 0.0;  // mse + penalties at the end of the epoch
};

struct FitResult {
  ModelParams params;
  std::vector<EpochStats> loss_trace;
  std::vector<int> nnz_columns;
  Eigen::Index target = 0;
};

/// Trains the predictor of component `target`. Starts from `initial` when
/// given; otherwise draws parameters from cfg.seed (eSRU models use
/// `shared_encoder` when given).
FitResult train_component(const ModelSpec& spec, const TimeSeriesDataset& ds, Eigen::Index target,
                          const TrainConfig& cfg, const ModelParams* initial = nullptr,
                          const Eigen::MatrixXd* shared_encoder = nullptr);

}  // namespace srugc
