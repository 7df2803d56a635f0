// Independent oracles shared by the unit tests and the acceptance runner.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "srugc/model.hpp"
#include "srugc/numerics.hpp"

namespace srugc::testing {

struct TinyDims {
  int n = 4;
  int d_phi = 3;
  std::vector<double> scales = {0.1, 0.7};
  int d_r = 2;
  int d_r_sketch = 2;
  int d_o = 3;
  int stage2_layers = 2;
  int stage2_width = 3;
};

inline ModelSpec tiny_spec(ModelKind kind, const TinyDims& d = {}, Activation h = {}) {
  ModelSpec s;
  s.kind = kind;
  s.d_phi = d.d_phi;
  s.d_r = d.d_r;
  s.d_o = d.d_o;
  s.d_r_sketch = d.d_r_sketch;
  s.stage2_layers = d.stage2_layers;
  s.stage2_width = d.stage2_width;
  s.scales = ScaleSet(d.scales);
  s.activation = h;
  return s;
}

/// Visits every stored matrix/vector entry in a fixed order. The encoder is
/// visited only when `with_encoder`.
inline void for_each_entry(ModelParams& p, bool with_encoder,
                           const std::function<void(const std::string&, double&)>& f) {
  auto mat = [&](const std::string& name, Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        f(name + "(" + std::to_string(i) + "," + std::to_string(j) + ")", m(i, j));
  };
  auto vec = [&](const std::string& name, Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) f(name + "(" + std::to_string(i) + ")", v(i));
  };
  mat("w_in", p.w_in);
  mat("w_f", p.w_f);
  vec("b_in", p.b_in);
  if (with_encoder && p.kind == ModelKind::esru) mat("encoder", p.encoder);
  for (std::size_t l = 0; l < p.feedback.size(); ++l) {
    mat("feedback" + std::to_string(l) + ".weight", p.feedback[l].weight);
    vec("feedback" + std::to_string(l) + ".bias", p.feedback[l].bias);
  }
  mat("w_o", p.w_o);
  vec("b_o", p.b_o);
  vec("w_y", p.w_y);
  f("b_y", p.b_y);
}

/// Fresh parameters with every bias also drawn at random, so each term of
/// the recurrence is exercised.
inline ModelParams random_params(const ModelSpec& spec, int n, std::uint64_t seed,
                                 double scale = 1.0) {
  SeededRng rng(seed);
  ModelParams p = init_params(spec, n, rng);
  for_each_entry(p, true, [&](const std::string&, double& v) { v = scale * (v + rng.uniform(-0.3, 0.3)); });
  return p;
}

inline Eigen::MatrixXd random_sequence(int T, int n, std::uint64_t seed) {
  SeededRng rng(seed);
  Eigen::MatrixXd seq(T, n);
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < n; ++j) seq(t, j) = rng.gaussian();
  return seq;
}

/// Straight-line forward pass written directly from the update equations,
/// with explicit loops and every sum accumulated left to right from zero.
/// `seq` is T x n; returns the T-1 predictions xhat_2 .. xhat_T.
inline std::vector<double> straight_line_forward(const ModelParams& p, const Eigen::MatrixXd& seq) {
  const int T = static_cast<int>(seq.rows());
  const int n = static_cast<int>(seq.cols());
  const int dp = static_cast<int>(p.w_in.rows());
  const int m = p.scales.size();
  const int S = dp * m;
  auto h = [&](double x) { return p.activation(x); };
  auto affine = [](const Eigen::MatrixXd& w, const std::vector<double>& x) {
    std::vector<double> y(w.rows());
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < w.cols(); ++j) acc += w(i, j) * x[j];
      y[i] = acc;
    }
    return y;
  };

  std::vector<std::vector<double>> u(T, std::vector<double>(S, 0.0));  // u[0] = 0
  std::vector<double> preds;
  for (int t = 1; t < T; ++t) {
    const int src = p.feedback_lag ? std::max(t - 2, 0) : t - 1;
    std::vector<double> r = u[src];
    if (p.kind == ModelKind::esru) r = affine(p.encoder, r);
    for (const auto& layer : p.feedback) {
      std::vector<double> z = affine(layer.weight, r);
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = h(z[i] + layer.bias(i));
      r = z;
    }
    std::vector<double> x(n);
    for (int j = 0; j < n; ++j) x[j] = seq(t - 1, j);
    const std::vector<double> a = affine(p.w_in, x);
    const std::vector<double> b = affine(p.w_f, r);
    std::vector<double> phi(dp);
    for (int k = 0; k < dp; ++k) phi[k] = h(a[k] + b[k] + p.b_in(k));
    for (int l = 0; l < m; ++l) {
      const double al = p.scales.alphas[l];
      for (int k = 0; k < dp; ++k) u[t][l * dp + k] = (1.0 - al) * u[t - 1][l * dp + k] + al * phi[k];
    }
    const std::vector<double> z = affine(p.w_o, u[t]);
    double y = 0.0;
    for (Eigen::Index j = 0; j < p.w_o.rows(); ++j) y += p.w_y(j) * h(z[j] + p.b_o(j));
    preds.push_back(y + p.b_y);
  }
  return preds;
}

/// Mean squared one-step error of predicting column `target`.
inline double mean_sq_error(const ModelParams& p, const Eigen::MatrixXd& seq, int target) {
  const Eigen::VectorXd pred = forward(p, seq).predictions;
  double acc = 0.0;
  for (Eigen::Index c = 0; c < pred.size(); ++c) {
    const double r = pred(c) - seq(c + 1, target);
    acc += r * r;
  }
  return acc / static_cast<double>(pred.size());
}

struct GradCheck {
  double max_rel_err = 0.0;
  std::string worst;
  int coordinates = 0;
};

/// Compares backward() with central finite differences of mean_sq_error
/// over every trainable entry (the encoder too when `train_encoder`).
/// Relative error is |a - b| / max(|a|, |b|, floor).
inline GradCheck finite_difference_check(const ModelParams& p, const Eigen::MatrixXd& seq, int target,
                                         bool train_encoder, double step = 1e-6,
                                         double floor = 1e-4) {
  const ForwardResult fwd = forward(p, seq, true);
  Eigen::VectorXd res(fwd.predictions.size());
  for (Eigen::Index c = 0; c < res.size(); ++c) res(c) = fwd.predictions(c) - seq(c + 1, target);
  ModelParams g = backward(p, *fwd.trace, res, train_encoder);

  std::vector<double> analytic;
  for_each_entry(g, train_encoder, [&](const std::string&, double& v) { analytic.push_back(v); });

  GradCheck out;
  ModelParams q = p;
  std::size_t idx = 0;
  for_each_entry(q, train_encoder, [&](const std::string& name, double& v) {
    const double keep = v;
    v = keep + step;
    const double up = mean_sq_error(q, seq, target);
    v = keep - step;
    const double down = mean_sq_error(q, seq, target);
    v = keep;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[idx++];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
    if (rel > out.max_rel_err) {
      out.max_rel_err = rel;
      out.worst = name;
    }
    ++out.coordinates;
  });
  return out;
}

/// EWMA recursion u_t = (1-a) u_{t-1} + a phi_t from u_0 = 0.
inline std::vector<double> ewma_recursive(const std::vector<double>& phi, double a) {
  std::vector<double> u(phi.size());
  double prev = 0.0;
  for (std::size_t t = 0; t < phi.size(); ++t) {
    prev = (1.0 - a) * prev + a * phi[t];
    u[t] = prev;
  }
  return u;
}

/// Closed form u_t = sum_{s<=t} a (1-a)^{t-s} phi_s.
inline std::vector<double> ewma_closed_form(const std::vector<double>& phi, double a) {
  std::vector<double> u(phi.size());
  for (std::size_t t = 0; t < phi.size(); ++t) {
    double acc = 0.0;
    for (std::size_t s = 0; s <= t; ++s) acc += a * std::pow(1.0 - a, static_cast<double>(t - s)) * phi[s];
    u[t] = acc;
  }
  return u;
}

}  // namespace srugc::testing
