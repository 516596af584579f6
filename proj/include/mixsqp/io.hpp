#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "mixsqp/problem.hpp"

namespace mixsqp::io {

// Column selection for effect/standard-error tables. A column index, when
// given, wins over the header name. The delimiter is detected from the
// header line (tab if present, else comma) unless set explicitly.
struct TableOptions {
  std::string effect_column = "b";
  std::string se_column = "SE";
  std::optional<std::size_t> effect_index;
  std::optional<std::size_t> se_index;
  std::optional<char> delimiter;
};

// Reads a delimited table with a header line; lines starting with '#' and
// blank lines are skipped. Throws IoError with the offending line number.
ObservationSet read_observations(std::istream& in, const TableOptions& opts = {});
ObservationSet read_observations(const std::filesystem::path& path,
                                 const TableOptions& opts = {});

// Two tab-separated columns with header "b\tSE"; values use shortest
// round-trip formatting.
void write_observations(std::ostream& out, const ObservationSet& obs);
void write_observations(const std::filesystem::path& path, const ObservationSet& obs);

// CSV of the stored matrix values; the header row is the sigma grid.
void write_matrix_csv(std::ostream& out, const MatrixXd& values, const VarianceGrid& grid);
std::pair<MatrixXd, VarianceGrid> read_matrix_csv(std::istream& in);

// "MIXL1", then n and m as little-endian uint64, then n*m little-endian
// float64 in row-major order.
void write_matrix_binary(std::ostream& out, const MatrixXd& values);
MatrixXd read_matrix_binary(std::istream& in);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace mixsqp::io
