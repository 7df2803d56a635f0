#include <gtest/gtest.h>

#include <cmath>

#include "srugc/datagen.hpp"

using namespace srugc;

namespace {

// Spectral radius by normalized power iteration on the companion matrix,
// averaged over a window to smooth out complex-pair oscillation.
double power_iteration_radius(const Eigen::MatrixXd& a, int order) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n * order, n * order);
  for (int k = 0; k < order; ++k) c.block(0, k * n, n, n) = a;
  c.block(n, 0, n * (order - 1), n * (order - 1)).setIdentity();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n * order);
  double log_growth = 0.0;
  const int warm = 3000, window = 3000;
  for (int k = 0; k < warm + window; ++k) {
    v = c * v;
    const double norm = v.norm();
    if (k >= warm) log_growth += std::log(norm);
    v /= norm;
  }
  return std::exp(log_growth / window);
}

}  // namespace

TEST(Lorenz96, FixedPointGivesConstantSeries) {
  Lorenz96Config cfg;
  cfg.n = 6;
  cfg.forcing = 10.0;
  cfg.samples = 20;
  cfg.burn_in = 5;
  cfg.obs_noise_std = 0.0;
  cfg.initial_state = Eigen::VectorXd::Constant(6, 10.0);
  const auto sim = simulate_lorenz96(cfg);
  EXPECT_TRUE((sim.dataset.sequences[0].array() == 10.0).all());
  EXPECT_TRUE((lorenz96_derivative(Eigen::VectorXd::Constant(6, 10.0), 10.0).array() == 0.0).all());
}

TEST(Lorenz96, TruthHasFourCircularNeighbours) {
  const auto truth = lorenz96_truth(10);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(truth.edges.row(i).sum(), 4);
    for (int off = -2; off <= 1; ++off) EXPECT_EQ(truth.edges(i, ((i + off) % 10 + 10) % 10), 1);
    // Circulant: row i is row 0 shifted by i.
    for (int j = 0; j < 10; ++j) EXPECT_EQ(truth.edges(i, j), truth.edges(0, ((j - i) % 10 + 10) % 10));
  }
}

TEST(Lorenz96, DerivativeMatchesHandEvaluation) {
  Eigen::VectorXd x(4);
  x << 1.0, 2.0, 3.0, 4.0;
  // dx0 = -x3 (x2 - x1) - x0 + F with F = 8: -4*(3-2) - 1 + 8 = 3.
  const auto dx = lorenz96_derivative(x, 8.0);
  EXPECT_DOUBLE_EQ(dx(0), 3.0);
  // dx2 = -x1 (x0 - x3) - x2 + 8 = -2*(1-4) - 3 + 8 = 11.
  EXPECT_DOUBLE_EQ(dx(2), 11.0);
}

namespace {

// Noise-free F=10 run sampled 10 times from a fixed on-attractor state.
Eigen::MatrixXd halving_run(double dt, int stride) {
  Lorenz96Config warm;
  warm.n = 10;
  warm.samples = 2;
  warm.burn_in = 200;
  warm.obs_noise_std = 0.0;
  warm.seed = 1;
  const Eigen::VectorXd x0 = simulate_lorenz96(warm).dataset.sequences[0].row(1).transpose();
  Lorenz96Config cfg = warm;
  cfg.samples = 10;
  cfg.burn_in = 0;
  cfg.initial_state = x0;
  cfg.integrator_step = dt;
  cfg.sample_stride = stride;
  return simulate_lorenz96(cfg).dataset.sequences[0];
}

}  // namespace

TEST(Lorenz96, StepHalvingShowsFourthOrderConvergence) {
  const auto a = halving_run(0.01, 5);
  const auto b = halving_run(0.005, 10);
  const auto c = halving_run(0.0025, 20);
  const double d1 = (a - b).cwiseAbs().maxCoeff();
  const double d2 = (b - c).cwiseAbs().maxCoeff();
  // RK4: each halving shrinks the global error by about 2^4.
  EXPECT_GT(d1 / d2, 12.0);
  EXPECT_LT(d1 / d2, 20.0);
  // At the default step the change is a few 1e-6 over this horizon.
  EXPECT_LT(d1, 2e-5);
}

TEST(Lorenz96, StepHalvingBelowMicroFromFinerStep) {
  const auto b = halving_run(0.005, 10);
  const auto c = halving_run(0.0025, 20);
  EXPECT_LT((b - c).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Lorenz96, DeterministicAndShaped) {
  Lorenz96Config cfg;
  cfg.samples = 50;
  cfg.burn_in = 20;
  cfg.seed = 9;
  const auto a = simulate_lorenz96(cfg);
  const auto b = simulate_lorenz96(cfg);
  ASSERT_EQ(a.dataset.sequences[0].rows(), 50);
  ASSERT_EQ(a.dataset.sequences[0].cols(), 10);
  EXPECT_EQ(a.dataset.sequences[0], b.dataset.sequences[0]);
  cfg.seed = 10;
  EXPECT_NE(simulate_lorenz96(cfg).dataset.sequences[0], a.dataset.sequences[0]);
}

TEST(Lorenz96, DivergenceReportsStep) {
  Lorenz96Config cfg;
  cfg.forcing = 40.0;
  cfg.integrator_step = 1.0;
  cfg.samples = 50;
  cfg.burn_in = 0;
  try {
    simulate_lorenz96(cfg);
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos) << e.what();
  }
}

TEST(Lorenz96, RejectsTooFewComponents) {
  Lorenz96Config cfg;
  cfg.n = 3;
  EXPECT_THROW(simulate_lorenz96(cfg), Error);
}

TEST(Var3, ZeroNoiseFromZeroIsZero) {
  VarConfig cfg;
  cfg.noise_cov_scale = 0.0;
  cfg.samples = 30;
  const auto sim = simulate_var3(cfg);
  EXPECT_TRUE((sim.dataset.sequences[0].array() == 0.0).all());
}

TEST(Var3, DefaultSupportHasThirtyEdges) {
  VarConfig cfg;
  cfg.seed = 1;
  const auto sim = simulate_var3(cfg);
  EXPECT_EQ(sim.truth.edge_count(), 30);
  EXPECT_EQ(sim.dataset.sequences[0].rows(), 1000);
}

TEST(Var3, LagMatricesShareOneSupport) {
  VarConfig cfg;
  SeededRng rng(4);
  const auto c = draw_var_coefficients(cfg, rng);
  ASSERT_EQ(c.lags.size(), 3u);
  for (const auto& a : c.lags) {
    EXPECT_EQ(a, c.lags[0]);
    EXPECT_TRUE(((a.array() != 0.0).cast<int>() == c.support.array()).all());
    EXPECT_TRUE(((a.array() == 0.0) || (a.array() == 0.0994)).all());
  }
}

TEST(Var3, DefaultCoefficientsAreStable) {
  VarConfig cfg;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SeededRng rng(seed);
    const auto c = draw_var_coefficients(cfg, rng);
    const double radius = companion_spectral_radius(c.lags);
    EXPECT_LT(radius, 1.0);
    EXPECT_NEAR(radius, power_iteration_radius(c.lags[0], 3), 1e-3);
  }
}

TEST(Var3, UnstableCoefficientsRejected) {
  VarConfig cfg;
  cfg.support_fraction = 1.0;
  cfg.coeff_value = 0.5;
  EXPECT_THROW(simulate_var3(cfg), Error);
}

TEST(Var3, DeterministicPerSeedAndBounded) {
  VarConfig cfg;
  cfg.seed = 3;
  cfg.samples = 4000;
  const auto a = simulate_var3(cfg);
  EXPECT_EQ(a.dataset.sequences[0], simulate_var3(cfg).dataset.sequences[0]);
  const auto& s = a.dataset.sequences[0];
  const double early = s.topRows(1000).array().square().mean();
  const double late = s.bottomRows(1000).array().square().mean();
  EXPECT_LT(late, 5.0 * early);
  EXPECT_TRUE(std::isfinite(late));
}

TEST(Standardize, ZeroMeanUnitVariance) {
  Lorenz96Config cfg;
  cfg.samples = 200;
  cfg.burn_in = 10;
  const auto z = standardize(simulate_lorenz96(cfg).dataset).dataset.sequences[0];
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double mean = z.col(j).mean();
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(std::sqrt((z.col(j).array() - mean).square().mean()), 1.0, 1e-12);
  }
}

TEST(Standardize, Idempotent) {
  VarConfig cfg;
  cfg.samples = 300;
  const auto once = standardize(simulate_var3(cfg).dataset).dataset;
  const auto twice = standardize(once).dataset;
  EXPECT_LT((once.sequences[0] - twice.sequences[0]).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Standardize, PoolsAcrossSequences) {
  TimeSeriesDataset ds;
  ds.sequences.push_back((Eigen::MatrixXd(2, 1) << 0.0, 2.0).finished());
  ds.sequences.push_back((Eigen::MatrixXd(2, 1) << 4.0, 6.0).finished());
  const auto out = standardize(ds);
  EXPECT_DOUBLE_EQ(out.means(0), 3.0);
  EXPECT_DOUBLE_EQ(out.scales(0), std::sqrt(5.0));
}

TEST(Standardize, ConstantComponentNamed) {
  TimeSeriesDataset ds;
  Eigen::MatrixXd s(5, 3);
  s << 1, 2, 7, 2, 3, 7, 3, 1, 7, 4, 0, 7, 5, 9, 7;
  ds.sequences.push_back(s);
  try {
    standardize(ds);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("component 2"), std::string::npos) << e.what();
  }
}

TEST(Dataset, ValidateRejectsShortAndNonFinite) {
  TimeSeriesDataset ds;
  ds.sequences.push_back(Eigen::MatrixXd::Zero(1, 2));
  EXPECT_THROW(ds.validate(), Error);
  ds.sequences[0] = Eigen::MatrixXd::Zero(3, 2);
  ds.sequences[0](1, 1) = NAN;
  EXPECT_THROW(ds.validate(), Error);
}
