// CSV emit/parse for datasets, adjacency and score matrices.
//
// Series files carry a header of component labels and one row per time
// step; multi-sequence files add a leading integer `sequence_id` column.
// Adjacency and score files are bare n x n grids without a header. Reals
// are written with 17 significant digits so a load reproduces them exactly.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "srugc/datagen.hpp"

namespace srugc {

/// Parse failure with a 1-based location. `row` counts data rows (a header
/// line is not counted); `column` counts fields. Zero means "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t row, std::size_t column,
             const std::string& what);
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

std::string format_real(double v);

struct CsvTable {
  std::vector<std::string> header;  // empty when the file has none
  std::vector<std::vector<std::string>> rows;
};

/// Splits a comma-separated file; rejects ragged rows and empty input.
CsvTable read_csv_table(std::istream& in, bool has_header, const std::string& source);
CsvTable read_csv_file(const std::filesystem::path& path, bool has_header);

/// Parses every cell of `table` as a real number.
Eigen::MatrixXd parse_real_table(const CsvTable& table, const std::string& source);

void write_series_csv(std::ostream& out, const TimeSeriesDataset& ds);
void write_series_csv(const std::filesystem::path& path, const TimeSeriesDataset& ds);

void write_adjacency_csv(std::ostream& out, const Eigen::MatrixXi& edges);
void write_adjacency_csv(const std::filesystem::path& path, const Eigen::MatrixXi& edges);

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);

/// Reads a headerless numeric grid (adjacency, scores).
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

}  // namespace srugc
