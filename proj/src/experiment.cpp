#include "srugc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "srugc/csv_io.hpp"
#include "srugc/eval.hpp"
#include "srugc/infer.hpp"

namespace srugc {

namespace {

// ---- config reading ------------------------------------------------------

class BlockReader {
 public:
  BlockReader(const Json& doc, std::string block) : block_(std::move(block)) {
    if (!doc.is_object()) throw ConfigError("'" + block_ + "' must be a JSON object");
    obj_ = &doc;
  }

  bool has(const std::string& key) const { return obj_->contains(key) && !obj_->at(key).is_null(); }

  template <class T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    used_.insert(key);
    if (!has(key)) throw ConfigError("missing required field '" + name(key) + "'");
    return convert<T>(key);
  }

  template <class T>
  std::optional<T> optional(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    return convert<T>(key);
  }

  void mark(const std::string& key) { used_.insert(key); }

  void finish() const {
    for (auto it = obj_->begin(); it != obj_->end(); ++it)
      if (!used_.count(it.key())) throw ConfigError("unknown key '" + name(it.key()) + "'");
  }

  std::string name(const std::string& key) const { return block_ + "." + key; }

 private:
  template <class T>
  T convert(const std::string& key) const {
    const Json& v = obj_->at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("field '" + name(key) + "' must be a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("field '" + name(key) + "' must be true or false");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer())
          throw ConfigError("field '" + name(key) + "' must be an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)
            throw ConfigError("field '" + name(key) + "' must be nonnegative");
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("field '" + name(key) + "' must be a string");
      }
      return v.get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("field '" + name(key) + "': " + e.what());
    }
  }

  const Json* obj_ = nullptr;
  std::string block_;
  std::set<std::string> used_;
};

std::string_view to_string(DatasetType t) {
  switch (t) {
    case DatasetType::lorenz96: return "lorenz96";
    case DatasetType::var3: return "var3";
    case DatasetType::file: return "file";
  }
  return "?";
}

DatasetType dataset_type_from_string(const std::string& s) {
  if (s == "lorenz96") return DatasetType::lorenz96;
  if (s == "var3") return DatasetType::var3;
  if (s == "file") return DatasetType::file;
  throw ConfigError("dataset.type must be one of lorenz96, var3, file (got '" + s + "')");
}

DatasetBlock parse_dataset(const Json& doc) {
  BlockReader r(doc, "dataset");
  DatasetBlock d;
  d.type = dataset_type_from_string(r.require<std::string>("type"));
  d.standardize = r.get("standardize", true);
  d.seed = r.optional<std::uint64_t>("seed");
  switch (d.type) {
    case DatasetType::lorenz96: {
      Lorenz96Config& c = d.lorenz;
      c.n = r.get("n", c.n);
      c.forcing = r.get("forcing", c.forcing);
      c.samples = r.get("samples", c.samples);
      c.integrator_step = r.get("integrator_step", c.integrator_step);
      c.sample_stride = r.get("sample_stride", c.sample_stride);
      c.burn_in = r.get("burn_in", c.burn_in);
      c.obs_noise_std = r.get("obs_noise_std", c.obs_noise_std);
      c.init_perturbation_std = r.get("init_perturbation_std", c.init_perturbation_std);
      try {
        c.validate();
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        throw ConfigError(std::string("dataset: ") + e.what());
      }
      break;
    }
    case DatasetType::var3: {
      VarConfig& c = d.var;
      c.n = r.get("n", c.n);
      c.support_fraction = r.get("support_fraction", c.support_fraction);
      c.coeff_value = r.get("coeff_value", c.coeff_value);
      c.noise_cov_scale = r.get("noise_cov_scale", c.noise_cov_scale);
      c.samples = r.get("samples", c.samples);
      c.burn_in = r.get("burn_in", c.burn_in);
      try {
        c.validate();
      } catch (const Error& e) {
        throw ConfigError(std::string("dataset: ") + e.what());
      }
      break;
    }
    case DatasetType::file: {
      DatasetManifest& m = d.manifest;
      const auto series = r.require<std::string>("series_path");
      if (series.empty()) throw ConfigError("field 'dataset.series_path' must not be empty");
      m.series_path = series;
      if (auto t = r.optional<std::string>("truth_path")) m.truth_path = *t;
      m.has_header = r.get("has_header", true);
      m.sequence_column = r.optional<std::string>("sequence_column");
      m.transpose_truth = r.get("transpose_truth", false);
      m.standardize = false;  // applied by the driver from d.standardize
      break;
    }
  }
  r.finish();
  return d;
}

ModelSpec parse_model(const Json& doc) {
  BlockReader r(doc, "model");
  ModelSpec s;
  try {
    s.kind = model_kind_from_string(r.get<std::string>("kind", "esru"));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("model.kind: ") + e.what());
  }
  s.d_phi = r.get("d_phi", s.d_phi);
  s.d_r = r.get("d_r", s.d_r);
  s.d_o = r.get("d_o", s.d_o);
  s.d_r_sketch = r.get("d_r_sketch", s.d_r_sketch);
  s.stage2_layers = r.get("stage2_layers", s.stage2_layers);
  s.stage2_width = r.get("stage2_width", s.stage2_width);
  s.feedback_lag = r.get("feedback_lag", s.feedback_lag);
  try {
    if (r.has("scales")) s.scales = ScaleSet(r.require<std::vector<double>>("scales"));
    r.mark("scales");
    s.activation.kind =
        activation_kind_from_string(r.get<std::string>("activation", std::string(to_string(s.activation.kind))));
    s.activation.alpha = r.get("activation_alpha", s.activation.alpha);
    s.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  r.finish();
  return s;
}

TrainConfig parse_train(const Json& doc) {
  BlockReader r(doc, "train");
  TrainConfig t;
  t.lambda1 = r.get("lambda1", t.lambda1);
  t.lambda2 = r.get("lambda2", t.lambda2);
  t.ridge = r.get("ridge", t.ridge);
  t.step_size = r.get("step_size", t.step_size);
  t.epochs = r.get("epochs", t.epochs);
  t.segment_length = r.get("segment_length", t.segment_length);
  t.ablation_ridge_wo = r.get("ablation_ridge_wo", t.ablation_ridge_wo);
  t.ablation_train_dr = r.get("ablation_train_dr", t.ablation_train_dr);
  r.finish();
  try {
    t.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  return t;
}

SweepBlock parse_sweep(const Json& doc) {
  BlockReader r(doc, "sweep");
  SweepBlock s;
  s.warm_start = r.get("warm_start", false);
  const bool has_grid = r.has("grid");
  const bool has_range = r.has("min") || r.has("max") || r.has("count");
  if (has_grid && has_range) throw ConfigError("sweep: give either 'grid' or 'min'/'max'/'count', not both");
  if (has_grid) {
    s.grid = r.require<std::vector<double>>("grid");
    if (s.grid.empty()) throw ConfigError("field 'sweep.grid' must not be empty");
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
      if (!(s.grid[k] >= 0.0) || !std::isfinite(s.grid[k]))
        throw ConfigError("field 'sweep.grid' must hold finite nonnegative values");
      if (k > 0 && !(s.grid[k] > s.grid[k - 1]))
        throw ConfigError("field 'sweep.grid' must be strictly increasing");
    }
  } else if (has_range) {
    const double lo = r.require<double>("min");
    const double hi = r.require<double>("max");
    const int count = r.get("count", 20);
    if (!(lo > 0.0) || !(hi >= lo) || count < 1 || (count > 1 && !(hi > lo)))
      throw ConfigError("sweep: log range needs 0 < min < max and count >= 1");
    s.grid = log_grid(lo, hi, count);
  }
  r.mark("grid");
  r.mark("min");
  r.mark("max");
  r.mark("count");
  r.finish();
  return s;
}

EvalBlock parse_eval(const Json& doc) {
  BlockReader r(doc, "eval");
  EvalBlock e;
  e.enabled = r.get("enabled", e.enabled);
  e.exclude_self = r.get("exclude_self", e.exclude_self);
  e.anchors = r.get("anchors", e.anchors);
  if (auto t = r.optional<std::string>("truth_path")) e.truth_path = *t;
  r.finish();
  return e;
}

RunBlock parse_run(const Json& doc) {
  BlockReader r(doc, "run");
  RunBlock run;
  run.seed = r.get("seed", run.seed);
  run.workers = r.get("workers", run.workers);
  run.output_dir = r.get<std::string>("output_dir", run.output_dir.string());
  if (run.workers < 1) throw ConfigError("field 'run.workers' must be >= 1");
  if (run.output_dir.empty()) throw ConfigError("field 'run.output_dir' must not be empty");
  r.finish();
  return run;
}

// ---- presets -------------------------------------------------------------

struct PresetRow {
  const char* name;
  const char* data;  // lorenz10, lorenz40, var, dream3, netsim
  const char* kind;
  std::vector<double> scales;
  double step_size;
  double ridge;
  double lambda_lo, lambda_hi;
  double lambda2;
  int stage2_layers;
  int segment_length;
  int epochs;
};

const std::vector<PresetRow>& preset_rows() {
  static const std::vector<PresetRow> rows = {
      {"lorenz_f10_esru", "lorenz10", "esru", {0.0, 0.01, 0.1, 0.99}, 0.01, 0.001, 0.03162, 0.1, 0.232079, 2, 125, 2000},
      {"lorenz_f40_esru", "lorenz40", "esru", {0.0, 0.01, 0.1, 0.99}, 0.01, 0.043088, 0.03162, 0.1, 0.928318, 2, 125, 2000},
      {"var_esru", "var", "esru", {0.0, 0.01, 0.1, 0.99}, 0.01, 0.021544, 0.03162, 0.3162, 0.464159, 2, 125, 2000},
      {"dream3_esru", "dream3", "esru", {0.05, 0.1, 0.2, 0.99}, 0.001, 0.1, 0.1, 3.162, 1.0, 1, 21, 2000},
      {"netsim_esru", "netsim", "esru", {0.0, 0.01, 0.1, 0.99}, 0.001, 0.232, 0.1, 3.162, 0.005, 2, 5, 2000},
      {"lorenz_f10_sru", "lorenz10", "sru", {0.0, 0.01, 0.1, 0.99}, 0.005, 0.021544, 0.1, 1.0, 0.0, 2, 125, 2000},
      {"lorenz_f40_sru", "lorenz40", "sru", {0.0, 0.01, 0.1, 0.99}, 0.01, 0.464159, 0.0631, 1.0, 0.0, 2, 125, 2000},
      {"var_sru", "var", "sru", {0.0, 0.01, 0.1, 0.99}, 0.04, 0.021544, 0.001, 1.0, 0.0, 2, 125, 2000},
      {"dream3_sru", "dream3", "sru", {0.0, 0.01, 0.1, 0.5, 0.99}, 0.005, 0.2, 0.01, 1.0, 0.0, 2, 21, 1000},
      {"netsim_sru", "netsim", "sru", {0.0, 0.01, 0.1, 0.99}, 0.001, 0.464159, 0.1, 3.162, 0.0, 2, 5, 2000},
  };
  return rows;
}

Json preset_dataset(const std::string& data) {
  if (data == "lorenz10") return {{"type", "lorenz96"}, {"n", 10}, {"forcing", 10.0}, {"samples", 500}};
  if (data == "lorenz40") return {{"type", "lorenz96"}, {"n", 10}, {"forcing", 40.0}, {"samples", 500}};
  if (data == "var") return {{"type", "var3"}, {"n", 10}, {"samples", 1000}};
  // Converted external data: paths must be supplied by the user's config.
  Json d = {{"type", "file"}, {"has_header", true}};
  if (data == "dream3") d["sequence_column"] = "sequence_id";
  return d;
}

Json echo_config(const ExperimentConfig& cfg) {
  Json j = config_to_json(cfg);
  j["run"].erase("workers");
  j["run"].erase("output_dir");
  return j;
}

// ---- output helpers ------------------------------------------------------

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  std::filesystem::path path(const std::string& name) {
    written_.insert(name);
    return dir_ / name;
  }

  void text(const std::string& name, const std::string& body) {
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw Error("cannot write " + (dir_ / name).string());
    out << body;
  }

  void json(const std::string& name, const Json& j) { write_json_file(path(name), j); }

  std::vector<std::string> files() const { return {written_.begin(), written_.end()}; }

 private:
  std::filesystem::path dir_;
  std::set<std::string> written_;
};

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string roc_csv(const RocCurve& roc) {
  std::ostringstream os;
  os << "fpr,tpr\n";
  for (const auto& p : roc.points) os << format_real(p.fpr) << ',' << format_real(p.tpr) << '\n';
  return os.str();
}

Json confusion_json(const Confusion& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}, {"tpr", c.tpr()}, {"fpr", c.fpr()}};
}

Json seeds_json(const ExperimentConfig& cfg, const LoadedData& data) {
  Json comps = Json::array();
  for (Eigen::Index i = 0; i < data.dataset.n(); ++i) comps.push_back(component_seed(cfg.run.seed, i));
  Json s = {{"run", cfg.run.seed}, {"dataset", data.dataset_seed}, {"components", comps}};
  if (cfg.model.kind == ModelKind::esru) s["encoder"] = split_seed(cfg.run.seed, kEncoderStream);
  return s;
}

void write_manifest(OutputDir& out, const std::string& command, const Json& config,
                    const Json& seeds, std::uint64_t input_hash) {
  Json m;
  m["command"] = command;
  m["config"] = config;
  m["seeds"] = seeds;
  m["input_hash"] = {{"algorithm", "fnv1a64"}, {"value", hex64(input_hash)}};
  m["outputs"] = out.files();
  out.json("manifest.json", m);
}

const GroundTruthAdjacency& require_truth(const ExperimentConfig& cfg, const LoadedData& data) {
  if (!data.truth)
    throw ConfigError(
        "field 'eval.truth_path' is required: eval.enabled is true but the dataset has no ground "
        "truth (set eval.truth_path or dataset.truth_path, or eval.enabled=false)");
  (void)cfg;
  return *data.truth;
}

void check_truth_available(const ExperimentConfig& cfg) {
  if (!cfg.eval.enabled || cfg.dataset.type != DatasetType::file) return;
  if (!cfg.eval.truth_path && !cfg.dataset.manifest.truth_path)
    throw ConfigError(
        "field 'eval.truth_path' is required: eval.enabled is true but the dataset has no ground "
        "truth (set eval.truth_path or dataset.truth_path, or eval.enabled=false)");
}

std::string series_text(const TimeSeriesDataset& ds) {
  std::ostringstream os;
  write_series_csv(os, ds);
  return os.str();
}

std::string adjacency_text(const Eigen::MatrixXi& edges) {
  std::ostringstream os;
  write_adjacency_csv(os, edges);
  return os.str();
}

std::string matrix_text(const Eigen::MatrixXd& m) {
  std::ostringstream os;
  write_matrix_csv(os, m);
  return os.str();
}

}  // namespace

// ---- public API ------------------------------------------------------------

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& row : preset_rows()) names.emplace_back(row.name);
  return names;
}

Json preset_json(const std::string& name) {
  for (const auto& row : preset_rows()) {
    if (name != row.name) continue;
    const bool esru = std::string(row.kind) == "esru";
    const bool dream = std::string(row.data) == "dream3";
    Json doc;
    doc["dataset"] = preset_dataset(row.data);
    doc["model"] = {{"kind", row.kind},       {"d_phi", 10},        {"d_r", 10},
                    {"d_o", 10},              {"d_r_sketch", 10},   {"stage2_layers", row.stage2_layers},
                    {"stage2_width", 10},     {"scales", row.scales}, {"activation", "elu"},
                    {"activation_alpha", 1.0}, {"feedback_lag", false}};
    doc["train"] = {{"lambda1", row.lambda_lo},
                    {"lambda2", esru ? row.lambda2 : 0.0},
                    {"ridge", row.ridge},
                    {"step_size", row.step_size},
                    {"epochs", row.epochs},
                    {"segment_length", row.segment_length},
                    {"ablation_ridge_wo", false},
                    {"ablation_train_dr", false}};
    doc["sweep"] = {{"min", row.lambda_lo}, {"max", row.lambda_hi}, {"count", 20}, {"warm_start", false}};
    doc["eval"] = {{"enabled", true}, {"exclude_self", dream}, {"anchors", true}};
    doc["run"] = {{"seed", 1}, {"workers", 1}, {"output_dir", std::string("out/") + row.name}};
    return doc;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

Json merge_config(Json base, const Json& overlay) {
  if (!overlay.is_object()) throw ConfigError("config document must be a JSON object");
  if (!base.is_object()) base = Json::object();
  if (overlay.contains("dataset") && overlay["dataset"].is_object() && base.contains("dataset") &&
      overlay["dataset"].contains("type") && base["dataset"].value("type", "") != overlay["dataset"]["type"])
    base.erase("dataset");
  if (overlay.contains("sweep") && overlay["sweep"].is_object() && base.contains("sweep")) {
    const Json& s = overlay["sweep"];
    Json& b = base["sweep"];
    if (s.contains("grid")) {
      b.erase("min");
      b.erase("max");
      b.erase("count");
    }
    if (s.contains("min") || s.contains("max") || s.contains("count")) b.erase("grid");
  }
  base.merge_patch(overlay);
  return base;
}

ExperimentConfig parse_config(const Json& doc) {
  BlockReader top(doc, "config");
  ExperimentConfig cfg;
  cfg.dataset = parse_dataset(top.require<Json>("dataset"));
  cfg.model = parse_model(top.get<Json>("model", Json::object()));
  cfg.train = parse_train(top.get<Json>("train", Json::object()));
  cfg.sweep = parse_sweep(top.get<Json>("sweep", Json::object()));
  cfg.eval = parse_eval(top.get<Json>("eval", Json::object()));
  cfg.run = parse_run(top.get<Json>("run", Json::object()));
  top.finish();
  cfg.train.seed = cfg.run.seed;
  return cfg;
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json d;
  const DatasetBlock& ds = cfg.dataset;
  d["type"] = std::string(to_string(ds.type));
  switch (ds.type) {
    case DatasetType::lorenz96: {
      const Lorenz96Config& c = ds.lorenz;
      d["n"] = c.n;
      d["forcing"] = c.forcing;
      d["samples"] = c.samples;
      d["integrator_step"] = c.integrator_step;
      d["sample_stride"] = c.sample_stride;
      d["burn_in"] = c.burn_in;
      d["obs_noise_std"] = c.obs_noise_std;
      d["init_perturbation_std"] = c.init_perturbation_std;
      break;
    }
    case DatasetType::var3: {
      const VarConfig& c = ds.var;
      d["n"] = c.n;
      d["support_fraction"] = c.support_fraction;
      d["coeff_value"] = c.coeff_value;
      d["noise_cov_scale"] = c.noise_cov_scale;
      d["samples"] = c.samples;
      d["burn_in"] = c.burn_in;
      break;
    }
    case DatasetType::file: {
      const DatasetManifest& m = ds.manifest;
      d["series_path"] = m.series_path.string();
      d["truth_path"] = m.truth_path ? Json(m.truth_path->string()) : Json(nullptr);
      d["has_header"] = m.has_header;
      d["sequence_column"] = m.sequence_column ? Json(*m.sequence_column) : Json(nullptr);
      d["transpose_truth"] = m.transpose_truth;
      break;
    }
  }
  d["standardize"] = ds.standardize;
  d["seed"] = ds.seed ? Json(*ds.seed) : Json(nullptr);

  const ModelSpec& s = cfg.model;
  Json model = {{"kind", std::string(to_string(s.kind))},
                {"d_phi", s.d_phi},
                {"d_r", s.d_r},
                {"d_o", s.d_o},
                {"d_r_sketch", s.d_r_sketch},
                {"stage2_layers", s.stage2_layers},
                {"stage2_width", s.stage2_width},
                {"scales", s.scales.alphas},
                {"activation", std::string(to_string(s.activation.kind))},
                {"activation_alpha", s.activation.alpha},
                {"feedback_lag", s.feedback_lag}};

  const TrainConfig& t = cfg.train;
  Json train = {{"lambda1", t.lambda1},
                {"lambda2", t.lambda2},
                {"ridge", t.ridge},
                {"step_size", t.step_size},
                {"epochs", t.epochs},
                {"segment_length", t.segment_length},
                {"ablation_ridge_wo", t.ablation_ridge_wo},
                {"ablation_train_dr", t.ablation_train_dr}};

  Json sweep = {{"warm_start", cfg.sweep.warm_start}};
  if (!cfg.sweep.grid.empty()) sweep["grid"] = cfg.sweep.grid;

  Json eval = {{"enabled", cfg.eval.enabled},
               {"exclude_self", cfg.eval.exclude_self},
               {"anchors", cfg.eval.anchors},
               {"truth_path", cfg.eval.truth_path ? Json(cfg.eval.truth_path->string()) : Json(nullptr)}};

  Json run = {{"seed", cfg.run.seed}, {"workers", cfg.run.workers}, {"output_dir", cfg.run.output_dir.string()}};

  return Json{{"dataset", d}, {"model", model}, {"train", train},
              {"sweep", sweep}, {"eval", eval},  {"run", run}};
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int k = 15; k >= 0; --k, v >>= 4) s[k] = digits[v & 0xF];
  return s;
}

LoadedData load_dataset(const ExperimentConfig& cfg) {
  LoadedData out;
  const DatasetBlock& d = cfg.dataset;
  out.dataset_seed = d.seed.value_or(cfg.run.seed);
  std::uint64_t h = fnv1a64("");
  switch (d.type) {
    case DatasetType::lorenz96:
    case DatasetType::var3: {
      SimulatedData sim;
      if (d.type == DatasetType::lorenz96) {
        Lorenz96Config c = d.lorenz;
        c.seed = out.dataset_seed;
        sim = simulate_lorenz96(c);
      } else {
        VarConfig c = d.var;
        c.seed = out.dataset_seed;
        sim = simulate_var3(c);
      }
      out.raw = std::move(sim.dataset);
      out.truth = std::move(sim.truth);
      h = fnv1a64(series_text(out.raw), h);
      h = fnv1a64(adjacency_text(out.truth->edges), h);
      break;
    }
    case DatasetType::file: {
      out.raw = load_series(d.manifest);
      h = fnv1a64(read_bytes(d.manifest.series_path), h);
      std::optional<std::filesystem::path> truth = cfg.eval.truth_path;
      if (!truth) truth = d.manifest.truth_path;
      if (truth) {
        out.truth = load_adjacency(*truth, out.raw.n(), d.manifest.transpose_truth);
        h = fnv1a64(read_bytes(*truth), h);
      }
      break;
    }
  }
  if (cfg.eval.truth_path && d.type != DatasetType::file) {
    out.truth = load_adjacency(*cfg.eval.truth_path, out.raw.n(), false);
    h = fnv1a64(read_bytes(*cfg.eval.truth_path), h);
  }
  out.input_hash = h;
  out.dataset = d.standardize ? standardize(out.raw).dataset : out.raw;
  return out;
}

ExitCode cmd_simulate(const ExperimentConfig& cfg) {
  if (cfg.dataset.type == DatasetType::file)
    throw ConfigError("simulate needs dataset.type lorenz96 or var3, not file");
  const LoadedData data = load_dataset(cfg);
  OutputDir out(cfg.run.output_dir);
  out.text("series.csv", series_text(data.raw));
  out.text("truth.csv", adjacency_text(data.truth->edges));
  Json info;
  info["dataset"] = echo_config(cfg)["dataset"];
  info["seed"] = data.dataset_seed;
  info["n"] = data.raw.n();
  info["samples"] = data.raw.total_samples();
  info["edges"] = data.truth->edge_count();
  out.json("dataset.json", info);
  write_manifest(out, "simulate", echo_config(cfg), {{"dataset", data.dataset_seed}},
                 data.input_hash);
  return ExitCode::ok;
}

ExitCode cmd_fit(const ExperimentConfig& cfg) {
  check_truth_available(cfg);
  const LoadedData data = load_dataset(cfg);
  const Eigen::Index n = data.dataset.n();

  FitOptions opts;
  opts.workers = cfg.run.workers;
  const auto outcomes = fit_all_components(cfg.model, data.dataset, cfg.train, opts);

  OutputDir out(cfg.run.output_dir);
  Json jobs = Json::array();
  bool all_ok = true;
  std::size_t epochs = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& oc = outcomes[i];
    Json job = {{"component", i}, {"status", oc.ok() ? "ok" : "failed"}};
    if (oc.ok()) {
      out.json("fit_" + std::to_string(i) + ".json", fit_to_json(*oc.fit));
      job["final_mse"] = oc.fit->loss_trace.back().mse;
      job["nnz_columns"] = oc.fit->nnz_columns.back();
      epochs = std::max(epochs, oc.fit->nnz_columns.size());
    } else {
      job["error"] = oc.error;
      all_ok = false;
    }
    jobs.push_back(std::move(job));
  }

  const AdjacencyScores adj = extract_adjacency(outcomes, n);
  out.text("scores.csv", matrix_text(adj.scores));

  std::ostringstream nnz;
  nnz << "epoch";
  for (const auto& label : data.dataset.component_labels()) nnz << ',' << label;
  nnz << '\n';
  for (std::size_t e = 0; e < epochs; ++e) {
    nnz << e + 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      nnz << ',';
      if (outcomes[i].ok()) nnz << outcomes[i].fit->nnz_columns[e];
    }
    nnz << '\n';
  }
  out.text("nnz_trace.csv", nnz.str());

  Json metrics;
  metrics["lambda1"] = cfg.train.lambda1;
  metrics["all_ok"] = all_ok;
  if (cfg.eval.enabled) {
    const GroundTruthAdjacency& truth = require_truth(cfg, data);
    const RocCurve roc = roc_from_scores(adj.scores, truth, cfg.eval.exclude_self);
    metrics["exclude_self"] = cfg.eval.exclude_self;
    metrics["score_auroc"] = roc.auroc;
    metrics["confusion"] = confusion_json(confusion(adj.binary(), truth, cfg.eval.exclude_self));
    out.text("roc.csv", roc_csv(roc));
  }
  metrics["jobs"] = std::move(jobs);
  metrics["config"] = echo_config(cfg);
  out.json("metrics.json", metrics);

  write_manifest(out, "fit", echo_config(cfg), seeds_json(cfg, data), data.input_hash);
  return all_ok ? ExitCode::ok : ExitCode::partial;
}

ExitCode cmd_sweep(const ExperimentConfig& cfg) {
  if (cfg.sweep.grid.empty())
    throw ConfigError("missing sweep grid: set 'sweep.grid' or 'sweep.min'/'sweep.max'/'sweep.count'");
  check_truth_available(cfg);
  const LoadedData data = load_dataset(cfg);
  const Eigen::Index n = data.dataset.n();

  SweepOptions opts;
  opts.workers = cfg.run.workers;
  opts.warm_start = cfg.sweep.warm_start;
  const SweepResult sweep = lambda_sweep(cfg.model, data.dataset, cfg.train, cfg.sweep.grid, opts);

  OutputDir out(cfg.run.output_dir);
  Json jobs = Json::array();
  for (std::size_t k = 0; k < sweep.points.size(); ++k) {
    const SweepPoint& pt = sweep.points[k];
    out.text("adjacency_" + std::to_string(k) + ".csv", adjacency_text(pt.adjacency.binary()));
    out.text("scores_" + std::to_string(k) + ".csv", matrix_text(pt.adjacency.scores));
    for (Eigen::Index i = 0; i < n; ++i) {
      Json job = {{"grid_index", k},
                  {"lambda1", pt.lambda1},
                  {"component", i},
                  {"status", pt.errors[i].empty() ? "ok" : "failed"}};
      if (pt.errors[i].empty()) job["final_mse"] = pt.final_mse(i);
      else job["error"] = pt.errors[i];
      jobs.push_back(std::move(job));
    }
  }

  const Json seeds = seeds_json(cfg, data);
  Json sj;
  sj["grid"] = sweep.grid;
  sj["seeds"] = seeds;
  sj["config"] = echo_config(cfg);
  out.json("sweep.json", sj);

  Json metrics;
  metrics["all_ok"] = sweep.all_ok();
  if (cfg.eval.enabled) {
    const GroundTruthAdjacency& truth = require_truth(cfg, data);
    const bool mask = cfg.eval.exclude_self;
    const RocCurve roc = roc_from_sweep(sweep, truth, mask, cfg.eval.anchors);
    out.text("roc.csv", roc_csv(roc));
    metrics["auroc"] = roc.auroc;
    metrics["exclude_self"] = mask;

    // Operating point: largest Youden index tpr - fpr; ties go to the smaller lambda1.
    std::optional<std::size_t> best;
    double best_j = 0.0;
    Json points = Json::array();
    for (std::size_t k = 0; k < sweep.points.size(); ++k) {
      const SweepPoint& pt = sweep.points[k];
      Json entry = {{"grid_index", k}, {"lambda1", pt.lambda1}, {"ok", pt.ok()}};
      if (pt.ok()) {
        const Confusion c = confusion(pt.adjacency.binary(), truth, mask);
        entry["confusion"] = confusion_json(c);
        // Ranking quality of the column norms at this lambda1; informational.
        entry["score_auroc"] = roc_from_scores(pt.adjacency.scores, truth, mask).auroc;
        const double j = c.tpr() - c.fpr();
        if (!best || j > best_j) {
          best = k;
          best_j = j;
        }
      }
      points.push_back(std::move(entry));
    }
    if (best) {
      const SweepPoint& pt = sweep.points[*best];
      metrics["operating_point"] = {{"grid_index", *best},
                                    {"lambda1", pt.lambda1},
                                    {"youden", best_j},
                                    {"confusion", confusion_json(confusion(pt.adjacency.binary(), truth, mask))}};
    } else {
      metrics["operating_point"] = nullptr;
    }
    metrics["grid_points"] = std::move(points);
  }
  metrics["jobs"] = std::move(jobs);
  metrics["config"] = echo_config(cfg);
  out.json("metrics.json", metrics);

  write_manifest(out, "sweep", echo_config(cfg), seeds, data.input_hash);
  return sweep.all_ok() ? ExitCode::ok : ExitCode::partial;
}

ExitCode cmd_eval(const EvalRequest& req) {
  const Eigen::MatrixXd pred = read_matrix_csv(req.pred_path);
  if (pred.rows() != pred.cols())
    throw Error(req.pred_path.string() + ": prediction must be square, got " +
                std::to_string(pred.rows()) + "x" + std::to_string(pred.cols()));
  const GroundTruthAdjacency truth = load_adjacency(req.truth_path, pred.rows());
  const RocCurve roc = roc_from_scores(pred, truth, req.exclude_self);

  OutputDir out(req.output_dir);
  out.text("roc.csv", roc_csv(roc));
  const Eigen::MatrixXi graph = (pred.array() > 0.0).cast<int>();
  Json metrics;
  metrics["auroc"] = roc.auroc;
  metrics["exclude_self"] = req.exclude_self;
  metrics["confusion"] = confusion_json(confusion(graph, truth, req.exclude_self));
  metrics["config"] = {{"pred_path", req.pred_path.string()},
                       {"truth_path", req.truth_path.string()},
                       {"exclude_self", req.exclude_self}};
  out.json("metrics.json", metrics);

  std::uint64_t h = fnv1a64(read_bytes(req.pred_path));
  h = fnv1a64(read_bytes(req.truth_path), h);
  write_manifest(out, "eval", metrics["config"], Json::object(), h);
  return ExitCode::ok;
}

}  // namespace srugc
