// Component-wise training across all targets, adjacency extraction and the
// lambda1 sweep.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "srugc/datagen.hpp"
#include "srugc/model.hpp"
#include "srugc/optim.hpp"

namespace srugc {

/// scores(i, j) = ||W_in^(i)(:, j)||; zero exactly when the column is zero.
struct AdjacencyScores {
  Eigen::MatrixXd scores;

  Eigen::MatrixXi binary() const { return (scores.array() > 0.0).cast<int>(); }
};

/// Stream index reserved for the shared eSRU encoder draw.
inline constexpr std::uint64_t kEncoderStream = 0xE5C0DE5ULL;

/// Seed of component `i` in a run seeded with `run_seed`.
std::uint64_t component_seed(std::uint64_t run_seed, Eigen::Index component);
/// Encoder shared by every component of a run.
Eigen::MatrixXd run_encoder(const ModelSpec& spec, std::uint64_t run_seed);

/// Runs `jobs` independent tasks on `workers` threads. Task i writes only
/// its own outputs, so results do not depend on the worker count.
void run_parallel(std::size_t jobs, int workers, const std::function<void(std::size_t)>& task);

struct ComponentOutcome {
  std::optional<FitResult> fit;
  std::string error;  // empty on success

  bool ok() const { return fit.has_value(); }
};

struct FitOptions {
  int workers = 1;
  /// Overrides the derived per-component seeds (length n).
  std::vector<std::uint64_t> component_seeds;
  /// Starting parameters per component (length n); otherwise fresh draws.
  std::vector<ModelParams> initial;
};

/// Fits n independent predictors; target i uses component_seed(cfg.seed, i)
/// and, for eSRU, every model shares run_encoder(spec, cfg.seed). Failures
/// are captured per component.
std::vector<ComponentOutcome> fit_all_components(const ModelSpec& spec, const TimeSeriesDataset& ds,
                                                 const TrainConfig& cfg,
                                                 const FitOptions& options = {});

/// Row i holds the column norms of component i's W_in. Failed components
/// leave a zero row.
AdjacencyScores extract_adjacency(const std::vector<ComponentOutcome>& fits, Eigen::Index n);
AdjacencyScores extract_adjacency(const std::vector<FitResult>& fits);

/// n log-spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int count);

struct SweepPoint {
  double lambda1 = 0.0;
  AdjacencyScores adjacency;
  Eigen::VectorXd final_mse;           // per component; NaN when failed
  std::vector<std::string> errors;     // per component; empty string on success
  std::vector<ModelParams> params;     // per component, when requested

  bool ok() const;
};

struct SweepResult {
  std::vector<double> grid;
  std::vector<SweepPoint> points;
  std::uint64_t run_seed = 0;

  bool all_ok() const;
};

struct SweepOptions {
  int workers = 1;
  /// Initialise each grid point from the previous point's fit instead of
  /// re-drawing the same initial parameters.
  bool warm_start = false;
  bool keep_params = false;
};

/// One fit_all_components per grid value, identically seeded so that only
/// lambda1 changes. Jobs are (grid index, component) pairs.
SweepResult lambda_sweep(const ModelSpec& spec, const TimeSeriesDataset& ds,
                         const TrainConfig& base_cfg, const std::vector<double>& grid,
                         const SweepOptions& options = {});

}  // namespace srugc
