#include "srugc/infer.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace srugc {

std::uint64_t component_seed(std::uint64_t run_seed, Eigen::Index component) {
  return split_seed(run_seed, static_cast<std::uint64_t>(component));
}

Eigen::MatrixXd run_encoder(const ModelSpec& spec, std::uint64_t run_seed) {
  SeededRng rng(split_seed(run_seed, kEncoderStream));
  return sample_encoder(spec, rng);
}

void run_parallel(std::size_t jobs, int workers, const std::function<void(std::size_t)>& task) {
  const std::size_t pool = std::max<std::size_t>(1, std::min<std::size_t>(workers, jobs));
  if (pool <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < pool; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) task(i);
    });
  }
  for (auto& th : threads) th.join();
}

namespace {

ComponentOutcome fit_one(const ModelSpec& spec, const TimeSeriesDataset& ds, Eigen::Index target,
                         TrainConfig cfg, std::uint64_t seed, const ModelParams* initial,
                         const Eigen::MatrixXd* encoder) {
  cfg.seed = seed;
  ComponentOutcome out;
  try {
    out.fit = train_component(spec, ds, target, cfg, initial, encoder);
  } catch (const std::exception& e) {
    out.error = "component " + std::to_string(target) + ": " + e.what();
  }
  return out;
}

}  // namespace

std::vector<ComponentOutcome> fit_all_components(const ModelSpec& spec, const TimeSeriesDataset& ds,
                                                 const TrainConfig& cfg,
                                                 const FitOptions& options) {
  ds.validate();
  cfg.validate();
  spec.validate();
  const Eigen::Index n = ds.n();
  if (!options.component_seeds.empty() &&
      static_cast<Eigen::Index>(options.component_seeds.size()) != n)
    throw Error("component_seeds must have one entry per component");
  if (!options.initial.empty() && static_cast<Eigen::Index>(options.initial.size()) != n)
    throw Error("initial parameters must have one entry per component");

  Eigen::MatrixXd encoder;
  if (spec.kind == ModelKind::esru) encoder = run_encoder(spec, cfg.seed);

  std::vector<ComponentOutcome> outcomes(n);
  run_parallel(static_cast<std::size_t>(n), options.workers, [&](std::size_t i) {
    const auto target = static_cast<Eigen::Index>(i);
    const std::uint64_t seed = options.component_seeds.empty() ? component_seed(cfg.seed, target)
                                                               : options.component_seeds[i];
    outcomes[i] = fit_one(spec, ds, target, cfg, seed,
                          options.initial.empty() ? nullptr : &options.initial[i],
                          spec.kind == ModelKind::esru ? &encoder : nullptr);
  });
  return outcomes;
}

AdjacencyScores extract_adjacency(const std::vector<ComponentOutcome>& fits, Eigen::Index n) {
  AdjacencyScores adj{Eigen::MatrixXd::Zero(n, n)};
  for (std::size_t i = 0; i < fits.size(); ++i) {
    if (!fits[i].ok()) continue;
    const auto& w_in = fits[i].fit->params.w_in;
    for (Eigen::Index j = 0; j < n; ++j) adj.scores(static_cast<Eigen::Index>(i), j) = w_in.col(j).norm();
  }
  return adj;
}

AdjacencyScores extract_adjacency(const std::vector<FitResult>& fits) {
  const auto n = static_cast<Eigen::Index>(fits.size());
  AdjacencyScores adj{Eigen::MatrixXd::Zero(n, n)};
  for (const auto& fit : fits) {
    if (fit.target < 0 || fit.target >= n || fit.params.n() != n)
      throw Error("fit results do not form a complete component set");
    for (Eigen::Index j = 0; j < n; ++j) adj.scores(fit.target, j) = fit.params.w_in.col(j).norm();
  }
  return adj;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (count < 1) throw Error("grid needs at least one point");
  if (!(lo > 0.0) || !(hi >= lo)) throw Error("log grid needs 0 < lo <= hi");
  if (count == 1) return {lo};
  std::vector<double> grid(count);
  const double a = std::log10(lo), b = std::log10(hi);
  for (int k = 0; k < count; ++k) grid[k] = std::pow(10.0, a + (b - a) * k / (count - 1));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

bool SweepPoint::ok() const {
  for (const auto& e : errors)
    if (!e.empty()) return false;
  return true;
}

bool SweepResult::all_ok() const {
  for (const auto& p : points)
    if (!p.ok()) return false;
  return true;
}

SweepResult lambda_sweep(const ModelSpec& spec, const TimeSeriesDataset& ds,
                         const TrainConfig& base_cfg, const std::vector<double>& grid,
                         const SweepOptions& options) {
  ds.validate();
  base_cfg.validate();
  spec.validate();
  if (grid.empty()) throw Error("lambda grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] < 0.0) throw Error("lambda grid values must be nonnegative");
    if (k > 0 && !(grid[k] > grid[k - 1])) throw Error("lambda grid must be strictly increasing");
  }

  const Eigen::Index n = ds.n();
  const std::size_t points = grid.size();
  Eigen::MatrixXd encoder;
  if (spec.kind == ModelKind::esru) encoder = run_encoder(spec, base_cfg.seed);
  const Eigen::MatrixXd* shared = spec.kind == ModelKind::esru ? &encoder : nullptr;

  std::vector<std::vector<ComponentOutcome>> outcomes(points, std::vector<ComponentOutcome>(n));
  auto run_job = [&](std::size_t k, Eigen::Index i, const ModelParams* initial) {
    TrainConfig cfg = base_cfg;
    cfg.lambda1 = grid[k];
    outcomes[k][i] = fit_one(spec, ds, i, cfg, component_seed(base_cfg.seed, i), initial, shared);
  };

  if (!options.warm_start) {
    run_parallel(points * static_cast<std::size_t>(n), options.workers, [&](std::size_t job) {
      run_job(job / n, static_cast<Eigen::Index>(job % n), nullptr);
    });
  } else {
    // Each component walks the grid in order, starting from its previous fit.
    run_parallel(static_cast<std::size_t>(n), options.workers, [&](std::size_t i) {
      const auto target = static_cast<Eigen::Index>(i);
      for (std::size_t k = 0; k < points; ++k) {
        const ModelParams* init = nullptr;
        if (k > 0 && outcomes[k - 1][i].ok()) init = &outcomes[k - 1][i].fit->params;
        run_job(k, target, init);
      }
    });
  }

  SweepResult result;
  result.grid = grid;
  result.run_seed = base_cfg.seed;
  for (std::size_t k = 0; k < points; ++k) {
    SweepPoint pt;
    pt.lambda1 = grid[k];
    pt.adjacency = extract_adjacency(outcomes[k], n);
    pt.final_mse = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
    pt.errors.resize(n);
    if (options.keep_params) pt.params.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& oc = outcomes[k][i];
      if (oc.ok()) {
        pt.final_mse(i) = oc.fit->loss_trace.back().mse;
        if (options.keep_params) pt.params[i] = oc.fit->params;
      } else {
        pt.errors[i] = oc.error;
      }
    }
    result.points.push_back(std::move(pt));
  }
  return result;
}

}  // namespace srugc
