#include "srugc/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace srugc {

namespace {

// y = W x, accumulated column by column so that every y_i is the
// left-to-right sum over j of W_ij x_j.
void gemv(const Eigen::MatrixXd& w, const double* __restrict x, double* __restrict y) {
  const Eigen::Index rows = w.rows();
  const double* __restrict col = w.data();
  for (Eigen::Index i = 0; i < rows; ++i) y[i] = 0.0;
  for (Eigen::Index j = 0; j < w.cols(); ++j, col += rows) {
    const double xj = x[j];
    for (Eigen::Index i = 0; i < rows; ++i) y[i] += col[i] * xj;
  }
}

// Activation derivative from the pre-activation and the cached output;
// for ELU below zero, alpha * e^x equals out + alpha.
inline double slope(const Activation& h, double pre, double out) {
  if (pre >= 0.0) return 1.0;
  return h.kind == ActivationKind::relu ? 0.0 : out + h.alpha;
}

void fill_uniform(Eigen::MatrixXd& m, double bound, SeededRng& rng) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-bound, bound);
}

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, SeededRng& rng) {
  Eigen::MatrixXd m(rows, cols);
  fill_uniform(m, 1.0 / std::sqrt(static_cast<double>(cols)), rng);
  return m;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error("invalid model parameters: " + what);
}

}  // namespace

std::string_view to_string(ModelKind kind) { return kind == ModelKind::sru ? "sru" : "esru"; }

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "sru") return ModelKind::sru;
  if (name == "esru") return ModelKind::esru;
  throw Error("unknown model kind '" + std::string(name) + "' (expected sru or esru)");
}

ScaleSet::ScaleSet(std::vector<double> values) : alphas(std::move(values)) {
  if (alphas.empty()) throw Error("scale set must contain at least one scale");
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    if (!(alphas[k] >= 0.0 && alphas[k] <= 1.0)) throw Error("scales must lie in [0, 1]");
    if (k > 0 && !(alphas[k] > alphas[k - 1])) throw Error("scales must be strictly increasing");
  }
}

void ModelSpec::validate() const {
  if (d_phi < 1 || d_r < 1 || d_o < 1) throw Error("layer dimensions must be positive");
  if (kind == ModelKind::esru) {
    if (d_r_sketch < 1) throw Error("d_r_sketch must be positive");
    if (d_r_sketch >= scales.size() * d_phi)
      throw Error("d_r_sketch must be smaller than m * d_phi");
    if (stage2_layers < 1) throw Error("eSRU needs at least one decoder layer");
    if (stage2_width < 1) throw Error("stage2_width must be positive");
  }
}

void ModelParams::validate() const {
  const Eigen::Index dp = w_in.rows();
  const Eigen::Index ms = static_cast<Eigen::Index>(scales.size()) * dp;
  require(dp > 0 && w_in.cols() > 0, "W_in is empty");
  require(b_in.size() == dp, "b_in size");
  require(w_f.rows() == dp, "W_f rows");
  require(w_o.cols() == ms, "W_o columns must equal m * d_phi");
  require(b_o.size() == w_o.rows() && w_y.size() == w_o.rows(), "output layer sizes");
  require(!feedback.empty(), "feedback network is empty");
  Eigen::Index in_dim = ms;
  if (kind == ModelKind::esru) {
    require(encoder.cols() == ms, "encoder columns must equal m * d_phi");
    in_dim = encoder.rows();
  } else {
    require(encoder.size() == 0, "SRU has no encoder");
    require(feedback.size() == 1, "SRU feedback has exactly one layer");
  }
  for (const auto& layer : feedback) {
    require(layer.weight.cols() == in_dim, "feedback layer input dimension");
    require(layer.bias.size() == layer.weight.rows(), "feedback layer bias size");
    in_dim = layer.weight.rows();
  }
  require(in_dim == w_f.cols(), "feedback output must match W_f columns");
  bool finite = w_in.allFinite() && w_f.allFinite() && b_in.allFinite() && encoder.allFinite() &&
                w_o.allFinite() && b_o.allFinite() && w_y.allFinite() && std::isfinite(b_y);
  for (const auto& layer : feedback) finite = finite && layer.weight.allFinite() && layer.bias.allFinite();
  require(finite, "non-finite entry");
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  z.w_in.setZero();
  z.w_f.setZero();
  z.b_in.setZero();
  z.encoder.setZero();
  for (auto& layer : z.feedback) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
  z.w_o.setZero();
  z.b_o.setZero();
  z.w_y.setZero();
  z.b_y = 0.0;
  return z;
}

int ModelParams::nonzero_input_columns() const {
  int count = 0;
  for (Eigen::Index j = 0; j < w_in.cols(); ++j)
    if ((w_in.col(j).array() != 0.0).any()) ++count;
  return count;
}

Eigen::MatrixXd sample_encoder(const ModelSpec& spec, SeededRng& rng) {
  return sample_gaussian_matrix(spec.d_r_sketch, spec.scales.size() * spec.d_phi,
                                1.0 / spec.d_r_sketch, rng);
}

ModelParams init_params(const ModelSpec& spec, Eigen::Index n, SeededRng& rng,
                        const Eigen::MatrixXd* encoder) {
  spec.validate();
  if (n < 1) throw Error("model needs at least one input component");
  const Eigen::Index ms = static_cast<Eigen::Index>(spec.scales.size()) * spec.d_phi;

  ModelParams p;
  p.kind = spec.kind;
  p.scales = spec.scales;
  p.activation = spec.activation;
  p.feedback_lag = spec.feedback_lag;
  p.init_seed = rng.seed();

  if (spec.kind == ModelKind::esru) {
    if (encoder) {
      if (encoder->rows() != spec.d_r_sketch || encoder->cols() != ms)
        throw Error("shared encoder has the wrong shape");
      p.encoder = *encoder;
    } else {
      p.encoder = sample_encoder(spec, rng);
    }
  }

  p.w_in = uniform_matrix(spec.d_phi, n, rng);
  p.w_f = uniform_matrix(spec.d_phi, spec.d_r, rng);
  p.b_in = Eigen::VectorXd::Zero(spec.d_phi);
  if (spec.kind == ModelKind::sru) {
    p.feedback.push_back({uniform_matrix(spec.d_r, ms, rng), Eigen::VectorXd::Zero(spec.d_r)});
  } else {
    Eigen::Index in_dim = spec.d_r_sketch;
    for (int l = 0; l < spec.stage2_layers; ++l) {
      const Eigen::Index out_dim = (l + 1 == spec.stage2_layers) ? spec.d_r : spec.stage2_width;
      p.feedback.push_back({uniform_matrix(out_dim, in_dim, rng), Eigen::VectorXd::Zero(out_dim)});
      in_dim = out_dim;
    }
  }
  p.w_o = uniform_matrix(spec.d_o, ms, rng);
  p.b_o = Eigen::VectorXd::Zero(spec.d_o);
  Eigen::MatrixXd wy = uniform_matrix(1, spec.d_o, rng);
  p.w_y = wy.row(0).transpose();
  p.b_y = 0.0;
  return p;
}

GroupIndexMap::GroupIndexMap(int d_phi, int m) : d_phi_(d_phi), m_(m) {
  if (d_phi < 1 || m < 1) throw Error("group index map needs d_phi, m >= 1");
}

std::vector<int> GroupIndexMap::group(int /*row*/, int k) const {
  if (k < 0 || k >= d_phi_) throw Error("group index out of range");
  std::vector<int> idx(m_);
  for (int l = 0; l < m_; ++l) idx[l] = k + l * d_phi_;
  return idx;
}

GroupIndexMap build_group_index_map(int d_phi, int m) { return GroupIndexMap(d_phi, m); }

ForwardResult forward(const ModelParams& p, const Eigen::MatrixXd& seq, bool keep_trace) {
  return forward_columns(p, seq.transpose(), keep_trace);
}

ForwardResult forward_columns(const ModelParams& p, const Eigen::MatrixXd& xt, bool keep_trace) {
  if (xt.rows() != p.n())
    throw Error("sequence has " + std::to_string(xt.rows()) + " components, model expects " +
                std::to_string(p.n()));
  if (xt.cols() < 2) throw Error("sequence needs at least 2 samples");

  const Eigen::Index steps = xt.cols() - 1;
  const Eigen::Index dp = p.d_phi();
  const Eigen::Index ms = p.state_dim();
  const Eigen::Index d_o = p.d_o();
  const int m = p.scales.size();
  const bool esru = p.kind == ModelKind::esru;
  const int lag = p.feedback_lag ? 1 : 0;
  const Activation& h = p.activation;

  ForwardTrace tr;
  tr.x = xt;
  tr.u = Eigen::MatrixXd::Zero(ms, steps + 1);
  tr.feedback_source.resize(steps);
  tr.feedback_input.resize(ms, steps);
  if (esru) tr.encoded.resize(p.encoder.rows(), steps);
  for (const auto& layer : p.feedback) {
    tr.layer_pre.emplace_back(layer.weight.rows(), steps);
    tr.layer_out.emplace_back(layer.weight.rows(), steps);
  }
  tr.phi_pre.resize(dp, steps);
  tr.phi.resize(dp, steps);
  tr.o_pre.resize(d_o, steps);
  tr.o.resize(d_o, steps);
  tr.predictions.resize(steps);

  Eigen::VectorXd in_part(dp), fb_part(dp);
  for (Eigen::Index c = 0; c < steps; ++c) {
    const Eigen::Index t = c + 1;
    const int src = static_cast<int>(std::max<Eigen::Index>(t - 1 - lag, 0));
    tr.feedback_source[c] = src;
    tr.feedback_input.col(c) = tr.u.col(src);

    const double* layer_in = tr.feedback_input.col(c).data();
    if (esru) {
      gemv(p.encoder, layer_in, tr.encoded.col(c).data());
      layer_in = tr.encoded.col(c).data();
    }
    for (std::size_t l = 0; l < p.feedback.size(); ++l) {
      double* pre = tr.layer_pre[l].col(c).data();
      double* out = tr.layer_out[l].col(c).data();
      gemv(p.feedback[l].weight, layer_in, pre);
      for (Eigen::Index i = 0; i < p.feedback[l].bias.size(); ++i) {
        pre[i] = pre[i] + p.feedback[l].bias(i);
        out[i] = h(pre[i]);
      }
      layer_in = out;
    }
    const double* r = layer_in;

    gemv(p.w_in, xt.col(c).data(), in_part.data());
    gemv(p.w_f, r, fb_part.data());
    double* phi_pre = tr.phi_pre.col(c).data();
    double* phi = tr.phi.col(c).data();
    for (Eigen::Index k = 0; k < dp; ++k) {
      phi_pre[k] = in_part(k) + fb_part(k) + p.b_in(k);
      phi[k] = h(phi_pre[k]);
    }

    const double* u_prev = tr.u.col(t - 1).data();
    double* u_now = tr.u.col(t).data();
    for (int l = 0; l < m; ++l) {
      const double a = p.scales.alphas[l];
      for (Eigen::Index k = 0; k < dp; ++k)
        u_now[l * dp + k] = (1.0 - a) * u_prev[l * dp + k] + a * phi[k];
    }

    double* o_pre = tr.o_pre.col(c).data();
    double* o = tr.o.col(c).data();
    gemv(p.w_o, u_now, o_pre);
    double pred = 0.0;
    for (Eigen::Index j = 0; j < d_o; ++j) {
      o_pre[j] = o_pre[j] + p.b_o(j);
      o[j] = h(o_pre[j]);
      pred += p.w_y(j) * o[j];
    }
    pred = pred + p.b_y;
    tr.predictions(c) = pred;

    if (!std::isfinite(pred) || !std::isfinite(tr.phi_pre.col(c).sum()) ||
        !std::isfinite(tr.o_pre.col(c).sum()))
      throw Error("non-finite value in forward pass at step " + std::to_string(t));
  }

  ForwardResult result;
  result.predictions = tr.predictions;
  if (keep_trace) result.trace = std::move(tr);
  return result;
}

ForwardResult sru_forward(const ModelParams& p, const Eigen::MatrixXd& seq, bool keep_trace) {
  if (p.kind != ModelKind::sru) throw Error("sru_forward called with eSRU parameters");
  return forward(p, seq, keep_trace);
}

ForwardResult esru_forward(const ModelParams& p, const Eigen::MatrixXd& seq, bool keep_trace) {
  if (p.kind != ModelKind::esru) throw Error("esru_forward called with SRU parameters");
  return forward(p, seq, keep_trace);
}

ModelParams backward(const ModelParams& p, const ForwardTrace& tr,
                     const Eigen::VectorXd& residuals, bool train_encoder) {
  const Eigen::Index steps = tr.predictions.size();
  if (residuals.size() != steps) throw Error("residual count does not match the trace");
  if (tr.x.rows() != p.n() || tr.u.rows() != p.state_dim() || tr.phi.rows() != p.d_phi() ||
      tr.o.rows() != p.d_o() || tr.layer_pre.size() != p.feedback.size() ||
      (p.kind == ModelKind::esru && tr.encoded.rows() != p.encoder.rows()))
    throw Error("forward trace does not match the parameters");

  const Eigen::Index dp = p.d_phi();
  const int m = p.scales.size();
  const bool esru = p.kind == ModelKind::esru;
  const Activation& h = p.activation;
  const std::size_t layers = p.feedback.size();

  ModelParams g = p.zeros_like();
  const Eigen::VectorXd dpred = residuals * (2.0 / static_cast<double>(steps));

  Eigen::MatrixXd du = Eigen::MatrixXd::Zero(p.state_dim(), steps + 1);
  Eigen::MatrixXd dz_o(p.d_o(), steps), dz_phi(dp, steps);
  std::vector<Eigen::MatrixXd> dz_layer;
  for (std::size_t l = 0; l < layers; ++l) dz_layer.emplace_back(tr.layer_pre[l].rows(), steps);
  Eigen::MatrixXd d_encoded;
  if (esru && train_encoder) d_encoded.resize(p.encoder.rows(), steps);

  Eigen::VectorXd dphi(dp), da;
  for (Eigen::Index c = steps - 1; c >= 0; --c) {
    const Eigen::Index t = c + 1;
    for (Eigen::Index j = 0; j < p.d_o(); ++j)
      dz_o(j, c) = p.w_y(j) * dpred(c) * slope(h, tr.o_pre(j, c), tr.o(j, c));
    du.col(t).noalias() += p.w_o.transpose() * dz_o.col(c);

    dphi.setZero();
    for (int l = 0; l < m; ++l) {
      const double a = p.scales.alphas[l];
      dphi += a * du.col(t).segment(l * dp, dp);
      du.col(t - 1).segment(l * dp, dp) += (1.0 - a) * du.col(t).segment(l * dp, dp);
    }
    for (Eigen::Index k = 0; k < dp; ++k) dz_phi(k, c) = dphi(k) * slope(h, tr.phi_pre(k, c), tr.phi(k, c));

    da = p.w_f.transpose() * dz_phi.col(c);
    for (std::size_t l = layers; l-- > 0;) {
      for (Eigen::Index i = 0; i < da.size(); ++i)
        dz_layer[l](i, c) = da(i) * slope(h, tr.layer_pre[l](i, c), tr.layer_out[l](i, c));
      da = p.feedback[l].weight.transpose() * dz_layer[l].col(c);
    }
    if (esru) {
      if (train_encoder) d_encoded.col(c) = da;
      da = p.encoder.transpose() * da;
    }
    const int src = tr.feedback_source[c];
    if (src >= 1) du.col(src) += da;
  }

  const auto u_steps = tr.u.rightCols(steps);
  g.w_o.noalias() = dz_o * u_steps.transpose();
  g.b_o = dz_o.rowwise().sum();
  g.w_y.noalias() = tr.o * dpred;
  g.b_y = dpred.sum();
  g.w_in.noalias() = dz_phi * tr.x.leftCols(steps).transpose();
  g.w_f.noalias() = dz_phi * tr.layer_out.back().transpose();
  g.b_in = dz_phi.rowwise().sum();
  for (std::size_t l = 0; l < layers; ++l) {
    const Eigen::MatrixXd& input =
        l > 0 ? tr.layer_out[l - 1] : (esru ? tr.encoded : tr.feedback_input);
    g.feedback[l].weight.noalias() = dz_layer[l] * input.transpose();
    g.feedback[l].bias = dz_layer[l].rowwise().sum();
  }
  if (esru && train_encoder) g.encoder.noalias() = d_encoded * tr.feedback_input.transpose();
  return g;
}

}  // namespace srugc
