// Config-driven experiment runs: simulate, fit, sweep and eval.
//
// A run is described by one JSON document with the blocks dataset, model,
// train, sweep, eval and run. Every command writes its artifacts plus a
// manifest.json (resolved config, seeds, input hash) into the output
// directory. Artifacts other than the manifest do not depend on the worker
// count.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "srugc/datagen.hpp"
#include "srugc/ingest.hpp"
#include "srugc/model.hpp"
#include "srugc/optim.hpp"
#include "srugc/serialize.hpp"

namespace srugc {

/// Malformed or inconsistent configuration (exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class ExitCode : int { ok = 0, usage = 1, runtime = 2, partial = 3 };

enum class DatasetType { lorenz96, var3, file };

struct DatasetBlock {
  DatasetType type = DatasetType::lorenz96;
  Lorenz96Config lorenz;
  VarConfig var;
  DatasetManifest manifest;  // type == file
  bool standardize = true;   // applied to simulated and loaded series alike
  std::optional<std::uint64_t> seed;  // generator seed; defaults to run.seed
};

struct SweepBlock {
  std::vector<double> grid;  // resolved, strictly increasing
  bool warm_start = false;
};

struct EvalBlock {
  bool enabled = true;
  bool exclude_self = false;
  bool anchors = true;
  std::optional<std::filesystem::path> truth_path;
};

struct RunBlock {
  std::uint64_t seed = 1;
  int workers = 1;
  std::filesystem::path output_dir = "out";
};

struct ExperimentConfig {
  DatasetBlock dataset;
  ModelSpec model;
  TrainConfig train;
  SweepBlock sweep;
  EvalBlock eval;
  RunBlock run;
};

/// Names accepted by preset_json.
std::vector<std::string> preset_names();
/// Complete config document for a named hyperparameter preset.
Json preset_json(const std::string& name);

/// Recursive merge of `overlay` into `base`. A dataset block whose type
/// differs from the base replaces it wholesale; a sweep block giving `grid`
/// drops a base range and vice versa. Null values delete keys.
Json merge_config(Json base, const Json& overlay);

/// Schema check and conversion; unknown keys and bad values raise ConfigError.
ExperimentConfig parse_config(const Json& doc);
/// Fully explicit document; parse_config(config_to_json(c)) reproduces c.
Json config_to_json(const ExperimentConfig& cfg);

struct LoadedData {
  TimeSeriesDataset raw;       // as generated or read
  TimeSeriesDataset dataset;   // after optional standardization
  std::optional<GroundTruthAdjacency> truth;
  std::uint64_t dataset_seed = 0;
  std::uint64_t input_hash = 0;  // FNV-1a over the input bytes
};

LoadedData load_dataset(const ExperimentConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

ExitCode cmd_simulate(const ExperimentConfig& cfg);
ExitCode cmd_fit(const ExperimentConfig& cfg);
ExitCode cmd_sweep(const ExperimentConfig& cfg);

struct EvalRequest {
  std::filesystem::path pred_path;
  std::filesystem::path truth_path;
  bool exclude_self = false;
  std::filesystem::path output_dir = "out";
};

/// Scores a prediction grid (binary adjacency or real scores) against truth.
ExitCode cmd_eval(const EvalRequest& req);

}  // namespace srugc
