// Statistical recurrent unit (SRU) and economy SRU (eSRU) predictors.
//
// One model predicts the next value of a single target series from the
// full multivariate past. Per time step t = 1..T-1:
//
//   r_t   = feedback(u_{t-1})                       (SRU: h(W_r u + b_r);
//                                                    eSRU: stage2(D_r u))
//   phi_t = h(W_in x_t + W_f r_t + b_in)
//   u_t^a = (1 - a) u_{t-1}^a + a phi_t             for every scale a
//   o_t   = h(W_o u_t + b_o)
//   xhat_{t+1} = w_y . o_t + b_y
//
// with u_0 = 0. The stacked state u_t is [u^{a_1}; ...; u^{a_m}], so entry
// k + l*d_phi is statistic k at scale l.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "srugc/numerics.hpp"

namespace srugc {

enum class ModelKind { sru, esru };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

/// The set of EWMA decay scales; values in [0, 1], strictly increasing.
struct ScaleSet {
  std::vector<double> alphas;

  explicit ScaleSet(std::vector<double> values = {0.0, 0.01, 0.1, 0.99});
  int size() const { return static_cast<int>(alphas.size()); }
};

/// Architecture description: everything needed to build fresh parameters.
struct ModelSpec {
  ModelKind kind = ModelKind::esru;
  int d_phi = 10;
  int d_r = 10;
  int d_o = 10;
  int d_r_sketch = 10;    // eSRU encoder output dimension d_r'
  int stage2_layers = 2;  // eSRU feedback decoder depth
  int stage2_width = 10;  // hidden width of the decoder
  ScaleSet scales;
  Activation activation;
  /// Alternative feedback timing: phi_t consumes feedback computed from
  /// u_{t-2} instead of u_{t-1}.
  bool feedback_lag = false;

  void validate() const;
};

struct DenseLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

/// Trainable (and fixed) parameters of one component predictor. SRU models
/// carry one feedback layer (W_r, b_r) and no encoder; eSRU models carry the
/// fixed encoder D_r and one or more decoder layers. The same structure
/// doubles as the gradient container.
struct ModelParams {
  ModelKind kind = ModelKind::sru;
  ScaleSet scales;
  Activation activation;
  bool feedback_lag = false;

  Eigen::MatrixXd w_in;  // d_phi x n
  Eigen::MatrixXd w_f;   // d_phi x d_r
  Eigen::VectorXd b_in;  // d_phi
  Eigen::MatrixXd encoder;              // eSRU only: d_r' x (m d_phi)
  std::vector<DenseLayer> feedback;     // SRU: {W_r, b_r}; eSRU: decoder layers
  Eigen::MatrixXd w_o;   // d_o x (m d_phi)
  Eigen::VectorXd b_o;   // d_o
  Eigen::VectorXd w_y;   // d_o
  double b_y = 0.0;

  std::uint64_t init_seed = 0;  // provenance only

  Eigen::Index n() const { return w_in.cols(); }
  Eigen::Index d_phi() const { return w_in.rows(); }
  Eigen::Index d_o() const { return w_o.rows(); }
  Eigen::Index state_dim() const { return w_o.cols(); }
  Eigen::Index d_r() const { return w_f.cols(); }

  /// Throws if any dimensions disagree or an entry is non-finite.
  void validate() const;
  /// Same shapes, every entry zero.
  ModelParams zeros_like() const;
  /// Number of W_in columns that are not exactly zero.
  int nonzero_input_columns() const;
};

/// Fan-in uniform weights, zero biases. eSRU models use `encoder` when
/// given, otherwise draw D_r ~ N(0, 1/d_r') from `rng` before the weights.
ModelParams init_params(const ModelSpec& spec, Eigen::Index n, SeededRng& rng,
                        const Eigen::MatrixXd* encoder = nullptr);

/// Encoder draw shared by all components of one run.
Eigen::MatrixXd sample_encoder(const ModelSpec& spec, SeededRng& rng);

/// Index sets G_{j,k} into row j of W_o: {k + l*d_phi : l = 0..m-1}.
class GroupIndexMap {
 public:
  GroupIndexMap(int d_phi, int m);

  int d_phi() const { return d_phi_; }
  int m() const { return m_; }
  /// Independent of the row j; kept in the signature for readability.
  std::vector<int> group(int row, int k) const;

 private:
  int d_phi_;
  int m_;
};

GroupIndexMap build_group_index_map(int d_phi, int m);

/// Cached intermediates for backpropagation. Per-step quantities are stored
/// column-wise; column c corresponds to step t = c + 1.
struct ForwardTrace {
  Eigen::MatrixXd x;        // n x T inputs (columns are time)
  Eigen::MatrixXd u;        // (m d_phi) x T; column 0 is u_0 = 0
  std::vector<int> feedback_source;  // u column fed to the feedback at each step
  Eigen::MatrixXd feedback_input;    // (m d_phi) x P
  Eigen::MatrixXd encoded;           // d_r' x P (eSRU)
  std::vector<Eigen::MatrixXd> layer_pre;  // per feedback layer, width x P
  std::vector<Eigen::MatrixXd> layer_out;
  Eigen::MatrixXd phi_pre, phi;  // d_phi x P
  Eigen::MatrixXd o_pre, o;      // d_o x P
  Eigen::VectorXd predictions;   // P
};

struct ForwardResult {
  Eigen::VectorXd predictions;  // T - 1 values, predictions(c) = xhat_{c+2}
  std::optional<ForwardTrace> trace;
};

/// Runs the recurrence on a T x n sequence.
ForwardResult forward(const ModelParams& p, const Eigen::MatrixXd& seq, bool keep_trace = false);
/// Same, on an n x T (time-major columns) sequence.
ForwardResult forward_columns(const ModelParams& p, const Eigen::MatrixXd& xt,
                              bool keep_trace = false);

ForwardResult sru_forward(const ModelParams& p, const Eigen::MatrixXd& seq, bool keep_trace = false);
ForwardResult esru_forward(const ModelParams& p, const Eigen::MatrixXd& seq, bool keep_trace = false);

/// Exact gradient of mean(residuals^2) with respect to every trainable
/// field; residuals(c) = prediction(c) - target(c). The encoder gradient is
/// left zero unless `train_encoder`.
ModelParams backward(const ModelParams& p, const ForwardTrace& trace,
                     const Eigen::VectorXd& residuals, bool train_encoder = false);

}  // namespace srugc
