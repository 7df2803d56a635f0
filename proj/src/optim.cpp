#include "srugc/optim.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace srugc {

namespace {

bool grouped_output(const ModelParams& p, const TrainConfig& cfg) {
  return p.kind == ModelKind::esru && !cfg.ablation_ridge_wo;
}

template <class Derived>
void ridge_update(Eigen::MatrixBase<Derived>& theta, const Eigen::MatrixBase<Derived>& grad,
                  const TrainConfig& cfg) {
  theta -= cfg.step_size * (grad + 2.0 * cfg.ridge * theta);
}

double ridge_sq(const ModelParams& p, const TrainConfig& cfg) {
  double sq = p.w_f.squaredNorm() + p.b_in.squaredNorm() + p.b_o.squaredNorm() +
              p.w_y.squaredNorm() + p.b_y * p.b_y;
  for (const auto& layer : p.feedback) sq += layer.weight.squaredNorm() + layer.bias.squaredNorm();
  if (!grouped_output(p, cfg)) sq += p.w_o.squaredNorm();
  if (p.kind == ModelKind::esru && cfg.ablation_train_dr) sq += p.encoder.squaredNorm();
  return sq;
}

}  // namespace

void TrainConfig::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0 || ridge < 0.0)
    throw Error("penalty weights must be nonnegative");
  if (!(step_size > 0.0)) throw Error("step_size must be positive");
  if (epochs < 1) throw Error("epochs must be >= 1");
  if (segment_length < 2) throw Error("segment_length must be >= 2");
}

std::vector<Segment> cut_segments(const TimeSeriesDataset& ds, int segment_length) {
  if (segment_length < 2) throw Error("segment_length must be >= 2");
  std::vector<Segment> out;
  for (const auto& seq : ds.sequences) {
    for (Eigen::Index start = 0; start < seq.rows(); start += segment_length) {
      const Eigen::Index len = std::min<Eigen::Index>(segment_length, seq.rows() - start);
      if (len < 2) break;
      out.push_back({seq.middleRows(start, len).transpose()});
    }
  }
  if (out.empty()) throw Error("dataset yields no training segments");
  return out;
}

LossParts penalties(const ModelParams& p, const TrainConfig& cfg) {
  LossParts parts;
  double in = 0.0;
  for (Eigen::Index j = 0; j < p.w_in.cols(); ++j) in += p.w_in.col(j).norm();
  parts.group_in = cfg.lambda1 * in;
  if (grouped_output(p, cfg)) {
    const Eigen::Index dp = p.d_phi();
    const int m = p.scales.size();
    double out = 0.0;
    for (Eigen::Index j = 0; j < p.w_o.rows(); ++j) {
      for (Eigen::Index k = 0; k < dp; ++k) {
        double sq = 0.0;
        for (int l = 0; l < m; ++l) sq += p.w_o(j, k + l * dp) * p.w_o(j, k + l * dp);
        out += std::sqrt(sq);
      }
    }
    parts.group_out = cfg.lambda2 * out;
  }
  parts.ridge = cfg.ridge * ridge_sq(p, cfg);
  return parts;
}

LossParts penalized_loss(const ModelParams& p, const std::vector<Segment>& segments,
                         Eigen::Index target, const TrainConfig& cfg) {
  LossParts parts = penalties(p, cfg);
  double sq = 0.0;
  Eigen::Index count = 0;
  for (const auto& seg : segments) {
    const Eigen::VectorXd res = forward_columns(p, seg.x).predictions -
                     seg.x.row(target).tail(seg.x.cols() - 1).transpose();
    sq += res.squaredNorm();
    count += res.size();
  }
  parts.mse = count > 0 ? sq / static_cast<double>(count) : 0.0;
  return parts;
}

void prox_step(ModelParams& p, const ModelParams& g, const TrainConfig& cfg) {
  const double eta = cfg.step_size;

  ridge_update(p.w_f, g.w_f, cfg);
  ridge_update(p.b_in, g.b_in, cfg);
  for (std::size_t l = 0; l < p.feedback.size(); ++l) {
    ridge_update(p.feedback[l].weight, g.feedback[l].weight, cfg);
    ridge_update(p.feedback[l].bias, g.feedback[l].bias, cfg);
  }
  ridge_update(p.b_o, g.b_o, cfg);
  ridge_update(p.w_y, g.w_y, cfg);
  p.b_y -= eta * (g.b_y + 2.0 * cfg.ridge * p.b_y);
  if (p.kind == ModelKind::esru && cfg.ablation_train_dr) ridge_update(p.encoder, g.encoder, cfg);

  p.w_in -= eta * g.w_in;
  const double tau_in = cfg.lambda1 * eta;
  for (Eigen::Index j = 0; j < p.w_in.cols(); ++j)
    group_soft_threshold_inplace({p.w_in.col(j).data(), static_cast<std::size_t>(p.w_in.rows())},
                                 tau_in);

  if (grouped_output(p, cfg)) {
    p.w_o -= eta * g.w_o;
    const double tau_out = cfg.lambda2 * eta;
    if (tau_out > 0.0) {
      const Eigen::Index dp = p.d_phi();
      const int m = p.scales.size();
      std::vector<double> group(m);
      for (Eigen::Index j = 0; j < p.w_o.rows(); ++j) {
        for (Eigen::Index k = 0; k < dp; ++k) {
          for (int l = 0; l < m; ++l) group[l] = p.w_o(j, k + l * dp);
          group_soft_threshold_inplace(group, tau_out);
          for (int l = 0; l < m; ++l) p.w_o(j, k + l * dp) = group[l];
        }
      }
    }
  } else {
    ridge_update(p.w_o, g.w_o, cfg);
  }
}

FitResult train_component(const ModelSpec& spec, const TimeSeriesDataset& ds, Eigen::Index target,
                          const TrainConfig& cfg, const ModelParams* initial,
                          const Eigen::MatrixXd* shared_encoder) {
  cfg.validate();
  ds.validate();
  if (target < 0 || target >= ds.n())
    throw Error("target component " + std::to_string(target) + " out of range");

  SeededRng rng(cfg.seed);
  FitResult fit;
  fit.target = target;
  fit.params = initial ? *initial : init_params(spec, ds.n(), rng, shared_encoder);
  fit.params.validate();
  if (fit.params.n() != ds.n()) throw Error("initial parameters do not match the dataset width");

  const std::vector<Segment> segments = cut_segments(ds, cfg.segment_length);
  std::vector<std::size_t> order(segments.size());
  std::iota(order.begin(), order.end(), 0);

  ModelParams& p = fit.params;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double sq = 0.0;
    Eigen::Index count = 0;
    for (std::size_t idx : order) {
      const Segment& seg = segments[idx];
      ForwardResult fwd = forward_columns(p, seg.x, true);
      const Eigen::VectorXd res =
          fwd.predictions - seg.x.row(target).tail(seg.x.cols() - 1).transpose();
      sq += res.squaredNorm();
      count += res.size();
      const ModelParams grads = backward(p, *fwd.trace, res, cfg.ablation_train_dr);
      prox_step(p, grads, cfg);
    }
    EpochStats stats;
    stats.mse = sq / static_cast<double>(count);
    stats.penalized = stats.mse + penalties(p, cfg).total();
    if (!std::isfinite(stats.penalized) || !p.w_in.allFinite() || !p.w_o.allFinite())
      throw Error("non-finite loss or parameters in epoch " + std::to_string(epoch));
    fit.loss_trace.push_back(stats);
    fit.nnz_columns.push_back(p.nonzero_input_columns());
  }
  return fit;
}

}  // namespace srugc
