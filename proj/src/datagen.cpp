#include "srugc/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

namespace srugc {

Eigen::Index TimeSeriesDataset::total_samples() const {
  Eigen::Index total = 0;
  for (const auto& s : sequences) total += s.rows();
  return total;
}

void TimeSeriesDataset::validate() const {
  if (sequences.empty()) throw Error("dataset has no sequences");
  const Eigen::Index width = n();
  if (width < 1) throw Error("dataset has no components");
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    if (seq.cols() != width)
      throw Error("sequence " + std::to_string(s) + " has " + std::to_string(seq.cols()) +
                  " components, expected " + std::to_string(width));
    if (seq.rows() < 2)
      throw Error("sequence " + std::to_string(s) + " has fewer than 2 samples");
    if (!seq.allFinite()) throw Error("sequence " + std::to_string(s) + " has non-finite values");
  }
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != width)
    throw Error("label count does not match component count");
}

std::vector<std::string> TimeSeriesDataset::component_labels() const {
  if (!labels.empty()) return labels;
  std::vector<std::string> out;
  for (Eigen::Index j = 0; j < n(); ++j) out.push_back("x" + std::to_string(j));
  return out;
}

void Lorenz96Config::validate() const {
  if (n < 4) throw Error("Lorenz-96 needs n >= 4");
  if (samples < 2) throw Error("Lorenz-96 needs at least 2 samples");
  if (!(integrator_step > 0.0)) throw Error("integrator_step must be positive");
  if (sample_stride < 1) throw Error("sample_stride must be >= 1");
  if (burn_in < 0) throw Error("burn_in must be >= 0");
  if (obs_noise_std < 0.0 || init_perturbation_std < 0.0)
    throw Error("noise levels must be nonnegative");
  if (initial_state && initial_state->size() != n)
    throw Error("initial_state length must equal n");
}

Eigen::VectorXd lorenz96_derivative(const Eigen::VectorXd& x, double forcing) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd dx(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xm1 = x((i + n - 1) % n);
    const double xm2 = x((i + n - 2) % n);
    const double xp1 = x((i + 1) % n);
    dx(i) = -xm1 * (xm2 - xp1) - x(i) + forcing;
  }
  return dx;
}

Eigen::VectorXd lorenz96_rk4_step(const Eigen::VectorXd& x, double forcing, double dt) {
  const Eigen::VectorXd k1 = lorenz96_derivative(x, forcing);
  const Eigen::VectorXd k2 = lorenz96_derivative(x + 0.5 * dt * k1, forcing);
  const Eigen::VectorXd k3 = lorenz96_derivative(x + 0.5 * dt * k2, forcing);
  const Eigen::VectorXd k4 = lorenz96_derivative(x + dt * k3, forcing);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

GroundTruthAdjacency lorenz96_truth(int n) {
  GroundTruthAdjacency truth{Eigen::MatrixXi::Zero(n, n)};
  for (int i = 0; i < n; ++i)
    for (int offset = -2; offset <= 1; ++offset) truth.edges(i, ((i + offset) % n + n) % n) = 1;
  return truth;
}

SimulatedData simulate_lorenz96(const Lorenz96Config& cfg) {
  cfg.validate();
  SeededRng rng(cfg.seed);
  Eigen::VectorXd x;
  if (cfg.initial_state) {
    x = *cfg.initial_state;
  } else {
    x = Eigen::VectorXd::Constant(cfg.n, cfg.forcing);
    for (int i = 0; i < cfg.n; ++i) x(i) += cfg.init_perturbation_std * rng.gaussian();
  }

  Eigen::MatrixXd series(cfg.samples, cfg.n);
  const long total = static_cast<long>(cfg.burn_in) + cfg.samples;
  long step = 0;
  for (long s = 0; s < total; ++s) {
    for (int k = 0; k < cfg.sample_stride; ++k) {
      x = lorenz96_rk4_step(x, cfg.forcing, cfg.integrator_step);
      ++step;
      if (!x.allFinite())
        throw Error("Lorenz-96 integration diverged at integrator step " + std::to_string(step));
    }
    if (s >= cfg.burn_in) series.row(s - cfg.burn_in) = x.transpose();
  }
  if (cfg.obs_noise_std > 0.0) {
    for (Eigen::Index t = 0; t < series.rows(); ++t)
      for (Eigen::Index j = 0; j < series.cols(); ++j)
        series(t, j) += cfg.obs_noise_std * rng.gaussian();
  }

  SimulatedData out;
  out.dataset.sequences.push_back(std::move(series));
  out.truth = lorenz96_truth(cfg.n);
  return out;
}

void VarConfig::validate() const {
  if (n < 1) throw Error("VAR needs n >= 1");
  if (!(support_fraction > 0.0 && support_fraction <= 1.0))
    throw Error("support_fraction must lie in (0, 1]");
  if (noise_cov_scale < 0.0) throw Error("noise_cov_scale must be nonnegative");
  if (samples < 2) throw Error("VAR needs at least 2 samples");
  if (burn_in < 0) throw Error("burn_in must be >= 0");
}

VarCoefficients draw_var_coefficients(const VarConfig& cfg, SeededRng& rng) {
  const int cells = cfg.n * cfg.n;
  const int active = static_cast<int>(std::ceil(cfg.support_fraction * cells - 1e-9));
  // Partial Fisher-Yates: the first `active` slots are a uniform draw
  // without replacement.
  std::vector<int> slots(cells);
  std::iota(slots.begin(), slots.end(), 0);
  for (int k = 0; k < active; ++k) {
    const int pick = k + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cells - k)));
    std::swap(slots[k], slots[pick]);
  }
  VarCoefficients coeffs;
  coeffs.support = Eigen::MatrixXi::Zero(cfg.n, cfg.n);
  for (int k = 0; k < active; ++k) coeffs.support(slots[k] / cfg.n, slots[k] % cfg.n) = 1;
  const Eigen::MatrixXd lag = coeffs.support.cast<double>() * cfg.coeff_value;
  coeffs.lags.assign(VarConfig::order, lag);
  return coeffs;
}

double companion_spectral_radius(const std::vector<Eigen::MatrixXd>& lags) {
  if (lags.empty()) return 0.0;
  const Eigen::Index n = lags.front().rows();
  const Eigen::Index p = static_cast<Eigen::Index>(lags.size());
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n * p, n * p);
  for (Eigen::Index k = 0; k < p; ++k) companion.block(0, k * n, n, n) = lags[k];
  if (p > 1) companion.block(n, 0, n * (p - 1), n * (p - 1)).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

SimulatedData simulate_var3(const VarConfig& cfg) {
  cfg.validate();
  SeededRng rng(cfg.seed);
  VarCoefficients coeffs = draw_var_coefficients(cfg, rng);
  const double radius = companion_spectral_radius(coeffs.lags);
  if (!(radius < 1.0))
    throw Error("VAR coefficients are unstable (companion spectral radius " +
                std::to_string(radius) + ")");

  const int n = cfg.n;
  const int total = cfg.burn_in + cfg.samples;
  const double noise_sd = std::sqrt(cfg.noise_cov_scale);
  // History buffer with VarConfig::order leading zero states.
  Eigen::MatrixXd history = Eigen::MatrixXd::Zero(n, total + VarConfig::order);
  for (int t = VarConfig::order; t < total + VarConfig::order; ++t) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < VarConfig::order; ++k) next += coeffs.lags[k] * history.col(t - 1 - k);
    for (int i = 0; i < n; ++i) next(i) += noise_sd * rng.gaussian();
    history.col(t) = next;
  }

  SimulatedData out;
  out.dataset.sequences.push_back(
      history.rightCols(cfg.samples).transpose());
  out.truth.edges = coeffs.support;
  return out;
}

Standardized standardize(const TimeSeriesDataset& ds) {
  ds.validate();
  const Eigen::Index n = ds.n();
  const double count = static_cast<double>(ds.total_samples());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (const auto& s : ds.sequences) mean += s.colwise().sum().transpose();
  mean /= count;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(n);
  for (const auto& s : ds.sequences)
    var += (s.rowwise() - mean.transpose()).array().square().colwise().sum().matrix().transpose();
  var /= count;

  Standardized out;
  out.means = mean;
  out.scales = var.cwiseSqrt();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(out.scales(j) > 0.0))
      throw Error("component " + std::to_string(j) + " has zero variance and cannot be standardized");
  }
  out.dataset.labels = ds.labels;
  for (const auto& s : ds.sequences) {
    Eigen::MatrixXd z = s.rowwise() - mean.transpose();
    z.array().rowwise() /= out.scales.transpose().array();
    out.dataset.sequences.push_back(std::move(z));
  }
  return out;
}

}  // namespace srugc
