#include "srugc/serialize.hpp"

#include <fstream>
#include <sstream>

namespace srugc {

namespace {

const Json& field(const Json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key))
    throw Error(what + ": missing field '" + key + "'");
  return j.at(key);
}

}  // namespace

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) data.push_back(m(i, k));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& what) {
  const auto rows = field(j, "rows", what).get<Eigen::Index>();
  const auto cols = field(j, "cols", what).get<Eigen::Index>();
  const Json& data = field(j, "data", what);
  if (rows < 0 || cols < 0 || !data.is_array() ||
      data.size() != static_cast<std::size_t>(rows * cols))
    throw Error(what + ": data length does not match " + std::to_string(rows) + "x" +
                std::to_string(cols));
  Eigen::MatrixXd m(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = data[idx++].get<double>();
  return m;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw Error(what + ": expected an array");
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Json params_to_json(const ModelParams& p) {
  Json j;
  j["kind"] = std::string(to_string(p.kind));
  j["dims"] = {{"n", p.n()},
               {"d_phi", p.d_phi()},
               {"d_r", p.d_r()},
               {"d_o", p.d_o()},
               {"state_dim", p.state_dim()}};
  j["scales"] = p.scales.alphas;
  j["activation"] = {{"kind", std::string(to_string(p.activation.kind))},
                     {"alpha", p.activation.alpha}};
  j["feedback_lag"] = p.feedback_lag;
  j["init_seed"] = p.init_seed;
  j["w_in"] = matrix_to_json(p.w_in);
  j["w_f"] = matrix_to_json(p.w_f);
  j["b_in"] = vector_to_json(p.b_in);
  if (p.kind == ModelKind::esru) j["encoder"] = matrix_to_json(p.encoder);
  Json layers = Json::array();
  for (const auto& layer : p.feedback)
    layers.push_back({{"weight", matrix_to_json(layer.weight)}, {"bias", vector_to_json(layer.bias)}});
  j["feedback"] = std::move(layers);
  j["w_o"] = matrix_to_json(p.w_o);
  j["b_o"] = vector_to_json(p.b_o);
  j["w_y"] = vector_to_json(p.w_y);
  j["b_y"] = p.b_y;
  return j;
}

ModelParams params_from_json(const Json& j) {
  const std::string what = "params";
  ModelParams p;
  p.kind = model_kind_from_string(field(j, "kind", what).get<std::string>());
  p.scales = ScaleSet(field(j, "scales", what).get<std::vector<double>>());
  const Json& act = field(j, "activation", what);
  p.activation.kind = activation_kind_from_string(field(act, "kind", "activation").get<std::string>());
  p.activation.alpha = field(act, "alpha", "activation").get<double>();
  p.feedback_lag = field(j, "feedback_lag", what).get<bool>();
  p.init_seed = field(j, "init_seed", what).get<std::uint64_t>();
  p.w_in = matrix_from_json(field(j, "w_in", what), "w_in");
  p.w_f = matrix_from_json(field(j, "w_f", what), "w_f");
  p.b_in = vector_from_json(field(j, "b_in", what), "b_in");
  if (p.kind == ModelKind::esru) p.encoder = matrix_from_json(field(j, "encoder", what), "encoder");
  for (const auto& layer : field(j, "feedback", what))
    p.feedback.push_back({matrix_from_json(field(layer, "weight", "feedback"), "feedback weight"),
                          vector_from_json(field(layer, "bias", "feedback"), "feedback bias")});
  p.w_o = matrix_from_json(field(j, "w_o", what), "w_o");
  p.b_o = vector_from_json(field(j, "b_o", what), "b_o");
  p.w_y = vector_from_json(field(j, "w_y", what), "w_y");
  p.b_y = field(j, "b_y", what).get<double>();
  p.validate();
  return p;
}

Json fit_to_json(const FitResult& fit) {
  Json mse = Json::array(), penalized = Json::array();
  for (const auto& s : fit.loss_trace) {
    mse.push_back(s.mse);
    penalized.push_back(s.penalized);
  }
  Json j;
  j["target"] = fit.target;
  j["params"] = params_to_json(fit.params);
  j["loss_trace"] = {{"mse", std::move(mse)}, {"penalized", std::move(penalized)}};
  j["nnz_columns"] = fit.nnz_columns;
  return j;
}

FitResult fit_from_json(const Json& j) {
  FitResult fit;
  fit.target = field(j, "target", "fit").get<Eigen::Index>();
  fit.params = params_from_json(field(j, "params", "fit"));
  const Json& trace = field(j, "loss_trace", "fit");
  const auto mse = field(trace, "mse", "loss_trace").get<std::vector<double>>();
  const auto pen = field(trace, "penalized", "loss_trace").get<std::vector<double>>();
  if (mse.size() != pen.size()) throw Error("loss_trace: mse and penalized differ in length");
  for (std::size_t e = 0; e < mse.size(); ++e) fit.loss_trace.push_back({mse[e], pen[e]});
  fit.nnz_columns = field(j, "nnz_columns", "fit").get<std::vector<int>>();
  return fit;
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace srugc
