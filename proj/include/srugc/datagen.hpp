// Benchmark dataset synthesis with known causal ground truth.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "srugc/numerics.hpp"

namespace srugc {

/// One or more ordered sequences of n-dimensional measurements. Each
/// sequence is a T_s x n matrix (rows are time steps).
struct TimeSeriesDataset {
  std::vector<Eigen::MatrixXd> sequences;
  std::vector<std::string> labels;  // empty or one per component

  Eigen::Index n() const { return sequences.empty() ? 0 : sequences.front().cols(); }
  Eigen::Index total_samples() const;

  /// Throws unless all sequences share n, each has >= 2 rows and every value
  /// is finite.
  void validate() const;
  /// Labels if present, otherwise x0, x1, ...
  std::vector<std::string> component_labels() const;
};

/// Binary n x n matrix; entry (i, j) = 1 means series j Granger-causes i.
struct GroundTruthAdjacency {
  Eigen::MatrixXi edges;

  Eigen::Index n() const { return edges.rows(); }
  Eigen::Index edge_count() const { return edges.sum(); }
};

struct Lorenz96Config {
  int n = 10;
  double forcing = 10.0;
  int samples = 500;
  double integrator_step = 0.01;
  int sample_stride = 5;
  int burn_in = 1000;  // retained-sample units
  double obs_noise_std = 0.1;
  double init_perturbation_std = 0.1;
  /// Starting state; defaults to all-F plus the perturbation above.
  std::optional<Eigen::VectorXd> initial_state;
  std::uint64_t seed = 0;

  void validate() const;
};

struct VarConfig {
  int n = 10;
  static constexpr int order = 3;
  double support_fraction = 0.3;
  double coeff_value = 0.0994;
  double noise_cov_scale = 0.01;
  int samples = 1000;
  int burn_in = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SimulatedData {
  TimeSeriesDataset dataset;
  GroundTruthAdjacency truth;
};

/// Right-hand side of the Lorenz-96 system with cyclic indices.
Eigen::VectorXd lorenz96_derivative(const Eigen::VectorXd& x, double forcing);
/// One classical fourth-order Runge-Kutta step.
Eigen::VectorXd lorenz96_rk4_step(const Eigen::VectorXd& x, double forcing, double dt);
/// Circulant truth: row i has ones at columns i-2, i-1, i, i+1 (mod n).
GroundTruthAdjacency lorenz96_truth(int n);

SimulatedData simulate_lorenz96(const Lorenz96Config& cfg);

/// The three (identical) lag matrices A1 = A2 = A3 and their support.
struct VarCoefficients {
  Eigen::MatrixXi support;
  std::vector<Eigen::MatrixXd> lags;
};

VarCoefficients draw_var_coefficients(const VarConfig& cfg, SeededRng& rng);
/// Spectral radius of the companion matrix of x_t = sum_k A_k x_{t-k}.
double companion_spectral_radius(const std::vector<Eigen::MatrixXd>& lags);

SimulatedData simulate_var3(const VarConfig& cfg);

struct Standardized {
  TimeSeriesDataset dataset;
  Eigen::VectorXd means;
  Eigen::VectorXd scales;  // population standard deviations
};

/// Per-component z-scoring pooled over all sequences.
Standardized standardize(const TimeSeriesDataset& ds);

}  // namespace srugc
