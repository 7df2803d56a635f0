#include "srugc/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace srugc {

namespace {

std::string location(const std::string& source, std::size_t row, std::size_t column) {
  std::string out = source;
  if (row > 0) out += ": row " + std::to_string(row);
  if (column > 0) out += (row > 0 ? ", column " : ": column ") + std::to_string(column);
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

ParseError::ParseError(const std::string& source, std::size_t row, std::size_t column,
                       const std::string& what)
    : Error(location(source, row, column) + ": " + what), row_(row), column_(column) {}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable read_csv_table(std::istream& in, bool has_header, const std::string& source) {
  CsvTable table;
  std::string line;
  std::size_t expected = 0;
  bool header_pending = has_header;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (header_pending) {
      table.header = std::move(fields);
      expected = table.header.size();
      header_pending = false;
      continue;
    }
    ++data_row;
    if (expected == 0) expected = fields.size();
    if (fields.size() != expected)
      throw ParseError(source, data_row, 0,
                       "ragged row: " + std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(expected));
    table.rows.push_back(std::move(fields));
  }
  if (table.rows.empty()) throw ParseError(source, 0, 0, "no data rows");
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_csv_table(in, has_header, path.string());
}

Eigen::MatrixXd parse_real_table(const CsvTable& table, const std::string& source) {
  const auto rows = static_cast<Eigen::Index>(table.rows.size());
  const auto cols = static_cast<Eigen::Index>(table.rows.front().size());
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const std::string& cell = table.rows[r][c];
      double value = 0.0;
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(value))
        throw ParseError(source, r + 1, c + 1, "non-numeric cell '" + cell + "'");
      out(r, c) = value;
    }
  }
  return out;
}

void write_series_csv(std::ostream& out, const TimeSeriesDataset& ds) {
  const bool multi = ds.sequences.size() > 1;
  const auto labels = ds.component_labels();
  if (multi) out << "sequence_id";
  for (std::size_t j = 0; j < labels.size(); ++j) out << (j > 0 || multi ? "," : "") << labels[j];
  out << '\n';
  for (std::size_t s = 0; s < ds.sequences.size(); ++s) {
    const auto& seq = ds.sequences[s];
    for (Eigen::Index t = 0; t < seq.rows(); ++t) {
      if (multi) out << (s + 1);
      for (Eigen::Index j = 0; j < seq.cols(); ++j)
        out << (j > 0 || multi ? "," : "") << format_real(seq(t, j));
      out << '\n';
    }
  }
}

void write_series_csv(const std::filesystem::path& path, const TimeSeriesDataset& ds) {
  auto out = open_for_write(path);
  write_series_csv(out, ds);
}

void write_adjacency_csv(std::ostream& out, const Eigen::MatrixXi& edges) {
  for (Eigen::Index i = 0; i < edges.rows(); ++i) {
    for (Eigen::Index j = 0; j < edges.cols(); ++j) out << (j > 0 ? "," : "") << edges(i, j);
    out << '\n';
  }
}

void write_adjacency_csv(const std::filesystem::path& path, const Eigen::MatrixXi& edges) {
  auto out = open_for_write(path);
  write_adjacency_csv(out, edges);
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j > 0 ? "," : "") << format_real(m(i, j));
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  auto out = open_for_write(path);
  write_matrix_csv(out, m);
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  return parse_real_table(read_csv_file(path, false), path.string());
}

}  // namespace srugc
