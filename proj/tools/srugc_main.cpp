// srugc: command line driver for simulation, fitting, lambda sweeps and
// scoring.
//
//   srugc simulate --preset lorenz_f40_esru --out data/
//   srugc sweep    --preset lorenz_f40_esru --workers 8 --seed 3 --out runs/s3
//   srugc fit      --config fit.json
//   srugc eval     pred.csv truth.csv --exclude-self --out scored/
//
// Exit codes: 0 success, 1 usage or config error, 2 data or runtime error,
// 3 some training jobs failed (details in metrics.json).

#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "srugc/csv_io.hpp"
#include "srugc/experiment.hpp"

namespace {

struct RunFlags {
  std::string config_path;
  std::string preset;
  std::string out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--preset", f.preset, "named hyperparameter preset (config overrides it)");
  cmd->add_option("--out", f.out, "output directory (overrides run.output_dir)");
  cmd->add_option("--workers", f.workers, "worker threads (overrides run.workers)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "run seed (overrides run.seed)");
}

srugc::ExperimentConfig resolve(const RunFlags& f) {
  using srugc::Json;
  if (f.config_path.empty() && f.preset.empty())
    throw srugc::ConfigError("give --config, --preset, or both");
  Json doc = f.preset.empty() ? Json::object() : srugc::preset_json(f.preset);
  if (!f.config_path.empty()) {
    Json user;
    try {
      user = srugc::read_json_file(f.config_path);
    } catch (const srugc::Error& e) {
      throw srugc::ConfigError(e.what());
    }
    doc = srugc::merge_config(std::move(doc), user);
  }
  Json& run = doc["run"];
  if (!run.is_object()) run = Json::object();
  if (!f.out.empty()) run["output_dir"] = f.out;
  if (f.workers) run["workers"] = *f.workers;
  if (f.seed) run["seed"] = *f.seed;
  return srugc::parse_config(doc);
}

int guarded(const std::function<srugc::ExitCode()>& body) {
  try {
    return static_cast<int>(body());
  } catch (const srugc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return static_cast<int>(srugc::ExitCode::usage);
  } catch (const srugc::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return static_cast<int>(srugc::ExitCode::runtime);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(srugc::ExitCode::runtime);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Granger causal network inference with component-wise SRU/eSRU models"};
  app.require_subcommand(0, 1);
  bool list_presets = false;
  app.add_flag("--list-presets", list_presets, "print the preset names and exit");

  RunFlags sim_flags, fit_flags, sweep_flags;
  auto* sim = app.add_subcommand("simulate", "generate a benchmark series and its ground truth");
  add_run_flags(sim, sim_flags);
  auto* fit = app.add_subcommand("fit", "fit every component at train.lambda1");
  add_run_flags(fit, fit_flags);
  auto* sweep = app.add_subcommand("sweep", "fit over the lambda1 grid and score the ROC");
  add_run_flags(sweep, sweep_flags);

  srugc::EvalRequest eval_req;
  std::string pred_path, truth_path, eval_out = "out";
  auto* eval = app.add_subcommand("eval", "score an adjacency or score grid against a truth grid");
  eval->add_option("pred", pred_path, "prediction CSV (n x n)")->required();
  eval->add_option("truth", truth_path, "ground truth CSV (n x n, 0/1)")->required();
  eval->add_flag("--exclude-self", eval_req.exclude_self, "ignore diagonal entries");
  eval->add_option("--out", eval_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(srugc::ExitCode::usage);
  }

  if (list_presets) {
    for (const auto& name : srugc::preset_names()) std::cout << name << '\n';
    return 0;
  }
  if (!sim->parsed() && !fit->parsed() && !sweep->parsed() && !eval->parsed()) {
    std::cerr << app.help();
    return static_cast<int>(srugc::ExitCode::usage);
  }
  if (sim->parsed()) return guarded([&] { return srugc::cmd_simulate(resolve(sim_flags)); });
  if (fit->parsed()) return guarded([&] { return srugc::cmd_fit(resolve(fit_flags)); });
  if (sweep->parsed()) return guarded([&] { return srugc::cmd_sweep(resolve(sweep_flags)); });
  return guarded([&] {
    eval_req.pred_path = pred_path;
    eval_req.truth_path = truth_path;
    eval_req.output_dir = eval_out;
    return srugc::cmd_eval(eval_req);
  });
}
