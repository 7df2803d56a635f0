// JSON documents for parameters and fit results.
//
// Matrices are stored as {"rows", "cols", "data"} with data flattened
// row-major. Doubles are written in shortest round-trip form, so a load
// reproduces every value exactly.

#pragma once

#include <filesystem>

#include <json.hpp>

#include "srugc/model.hpp"
#include "srugc/optim.hpp"

namespace srugc {

using Json = nlohmann::ordered_json;

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& what);
Json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const Json& j, const std::string& what);

Json params_to_json(const ModelParams& p);
ModelParams params_from_json(const Json& j);

Json fit_to_json(const FitResult& fit);
FitResult fit_from_json(const Json& j);

/// Two-space indented, newline terminated.
void write_json_file(const std::filesystem::path& path, const Json& j);
Json read_json_file(const std::filesystem::path& path);

}  // namespace srugc
