// Loading external series and ground-truth graphs from CSV.

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "srugc/datagen.hpp"

namespace srugc {

struct DatasetManifest {
  std::filesystem::path series_path;
  std::optional<std::filesystem::path> truth_path;
  bool has_header = true;
  /// Column holding integer sequence ids; rows of one sequence are contiguous.
  std::optional<std::string> sequence_column;
  bool standardize = false;
  /// Set for sources that store (i, j) = 1 as "i causes j".
  bool transpose_truth = false;
};

TimeSeriesDataset load_series(const DatasetManifest& manifest);

GroundTruthAdjacency load_adjacency(const std::filesystem::path& path, Eigen::Index n,
                                    bool transpose = false);

}  // namespace srugc
