#include "srugc/ingest.hpp"

#include <algorithm>
#include <set>

#include "srugc/csv_io.hpp"

namespace srugc {

TimeSeriesDataset load_series(const DatasetManifest& manifest) {
  const std::string source = manifest.series_path.string();
  CsvTable table = read_csv_file(manifest.series_path, manifest.has_header);

  std::optional<std::size_t> id_col;
  if (manifest.sequence_column) {
    if (!manifest.has_header)
      throw Error(source + ": sequence_column requires a header row");
    auto it = std::find(table.header.begin(), table.header.end(), *manifest.sequence_column);
    if (it == table.header.end())
      throw Error(source + ": no column named '" + *manifest.sequence_column + "'");
    id_col = static_cast<std::size_t>(it - table.header.begin());
  }

  const Eigen::MatrixXd values = parse_real_table(table, source);
  TimeSeriesDataset ds;
  if (manifest.has_header) {
    for (std::size_t c = 0; c < table.header.size(); ++c)
      if (!id_col || c != *id_col) ds.labels.push_back(table.header[c]);
  }

  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < values.cols(); ++c)
    if (!id_col || c != static_cast<Eigen::Index>(*id_col)) keep.push_back(c);
  if (keep.empty()) throw Error(source + ": no value columns");

  auto take_rows = [&](Eigen::Index begin, Eigen::Index end) {
    Eigen::MatrixXd seq(end - begin, static_cast<Eigen::Index>(keep.size()));
    for (Eigen::Index r = begin; r < end; ++r)
      for (std::size_t k = 0; k < keep.size(); ++k) seq(r - begin, k) = values(r, keep[k]);
    return seq;
  };

  if (!id_col) {
    ds.sequences.push_back(take_rows(0, values.rows()));
  } else {
    std::set<double> seen;
    Eigen::Index begin = 0;
    for (Eigen::Index r = 1; r <= values.rows(); ++r) {
      if (r < values.rows() && values(r, *id_col) == values(begin, *id_col)) continue;
      const double id = values(begin, *id_col);
      if (!seen.insert(id).second)
        throw ParseError(source, begin + 1, *id_col + 1,
                         "sequence id rows are not contiguous");
      ds.sequences.push_back(take_rows(begin, r));
      begin = r;
    }
  }

  for (std::size_t s = 0; s < ds.sequences.size(); ++s)
    if (ds.sequences[s].rows() < 2)
      throw Error(source + ": sequence " + std::to_string(s + 1) + " has fewer than 2 samples");
  ds.validate();
  if (manifest.standardize) return standardize(ds).dataset;
  return ds;
}

GroundTruthAdjacency load_adjacency(const std::filesystem::path& path, Eigen::Index n,
                                    bool transpose) {
  const Eigen::MatrixXd raw = read_matrix_csv(path);
  if (raw.rows() != n || raw.cols() != n)
    throw Error(path.string() + ": adjacency has shape " + std::to_string(raw.rows()) + "x" +
                std::to_string(raw.cols()) + ", expected " + std::to_string(n) + "x" +
                std::to_string(n));
  GroundTruthAdjacency truth{Eigen::MatrixXi(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = raw(i, j);
      if (v != 0.0 && v != 1.0)
        throw ParseError(path.string(), i + 1, j + 1, "adjacency entries must be 0 or 1");
      truth.edges(i, j) = static_cast<int>(v);
    }
  }
  if (transpose) truth.edges.transposeInPlace();
  return truth;
}

}  // namespace srugc
