#include "mixsqp/io.hpp"

#include <array>
#include <cmath>
#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

#include "mixsqp/error.hpp"

namespace mixsqp::io {

namespace {

constexpr std::string_view kMagic = "MIXL1";

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '"' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool skippable(std::string_view line) {
  const std::string_view t = trim(line);
  return t.empty() || t.front() == '#';
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    return std::nullopt;
  return v;
}

std::size_t resolve_column(const std::vector<std::string_view>& header,
                           const std::string& name,
                           const std::optional<std::size_t>& index) {
  if (index) {
    if (*index >= header.size())
      throw IoError("column index " + std::to_string(*index) +
                    " out of range (header has " + std::to_string(header.size()) +
                    " columns)");
    return *index;
  }
  for (std::size_t i = 0; i < header.size(); ++i)
    if (trim(header[i]) == name) return i;
  throw IoError("missing column \"" + name + "\" in header");
}

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (std::size_t i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(bytes.data(), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), 8);
  if (!in) throw IoError("binary matrix: truncated input");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

ObservationSet read_observations(std::istream& in, const TableOptions& opts) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  char delim = opts.delimiter.value_or('\t');
  std::size_t effect_col = 0, se_col = 0, width = 0;
  ObservationSet obs;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    if (!have_header) {
      if (!opts.delimiter) delim = line.find('\t') != std::string::npos ? '\t' : ',';
      const auto header = split(line, delim);
      width = header.size();
      effect_col = resolve_column(header, opts.effect_column, opts.effect_index);
      se_col = resolve_column(header, opts.se_column, opts.se_index);
      have_header = true;
      continue;
    }
    const auto fields = split(line, delim);
    if (fields.size() != width)
      throw IoError("line " + std::to_string(line_no) + ": expected " +
                    std::to_string(width) + " fields, found " +
                    std::to_string(fields.size()));
    const auto z = parse_double(fields[effect_col]);
    const auto s = parse_double(fields[se_col]);
    if (!z || !s)
      throw IoError("line " + std::to_string(line_no) + ": cannot parse number");
    if (!std::isfinite(*z) || !std::isfinite(*s) || !(*s > 0.0))
      throw IoError("line " + std::to_string(line_no) +
                    ": values must be finite with positive standard error");
    obs.z.push_back(*z);
    obs.s.push_back(*s);
  }
  if (!have_header) throw IoError("input has no header line");
  if (obs.size() == 0) throw IoError("input has no data rows");
  return obs;
}

ObservationSet read_observations(const std::filesystem::path& path,
                                 const TableOptions& opts) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_observations(in, opts);
}

void write_observations(std::ostream& out, const ObservationSet& obs) {
  out << "b\tSE\n";
  for (std::size_t j = 0; j < obs.size(); ++j)
    out << format_double(obs.z[j]) << '\t' << format_double(obs.s[j]) << '\n';
}

void write_observations(const std::filesystem::path& path, const ObservationSet& obs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_observations(out, obs);
  if (!out) throw IoError("write failed: " + path.string());
}

void write_matrix_csv(std::ostream& out, const MatrixXd& values, const VarianceGrid& grid) {
  if (static_cast<Index>(grid.size()) != values.cols())
    throw InvalidInput("grid size does not match matrix columns");
  for (std::size_t k = 0; k < grid.size(); ++k)
    out << (k ? "," : "") << format_double(grid.sigma[k]);
  out << '\n';
  for (Index j = 0; j < values.rows(); ++j) {
    for (Index k = 0; k < values.cols(); ++k)
      out << (k ? "," : "") << format_double(values(j, k));
    out << '\n';
  }
}

std::pair<MatrixXd, VarianceGrid> read_matrix_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  VarianceGrid grid;
  std::vector<double> flat;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split(line, ',');
    if (have_header && fields.size() != grid.size())
      throw IoError("line " + std::to_string(line_no) + ": expected " +
                    std::to_string(grid.size()) + " fields");
    for (auto f : fields) {
      const auto v = parse_double(f);
      if (!v) throw IoError("line " + std::to_string(line_no) + ": cannot parse number");
      (have_header ? flat : grid.sigma).push_back(*v);
    }
    have_header = true;
  }
  if (!have_header) throw IoError("matrix CSV has no header line");
  const Index m = static_cast<Index>(grid.size());
  const Index n = static_cast<Index>(flat.size()) / m;
  MatrixXd values(n, m);
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < m; ++k) values(j, k) = flat[static_cast<std::size_t>(j * m + k)];
  return {std::move(values), std::move(grid)};
}

void write_matrix_binary(std::ostream& out, const MatrixXd& values) {
  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  put_u64(out, static_cast<std::uint64_t>(values.rows()));
  put_u64(out, static_cast<std::uint64_t>(values.cols()));
  for (Index j = 0; j < values.rows(); ++j)
    for (Index k = 0; k < values.cols(); ++k)
      put_u64(out, std::bit_cast<std::uint64_t>(values(j, k)));
}

MatrixXd read_matrix_binary(std::istream& in) {
  std::array<char, kMagic.size()> magic{};
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!in || std::string_view(magic.data(), magic.size()) != kMagic)
    throw IoError("binary matrix: bad magic");
  const std::uint64_t n = get_u64(in);
  const std::uint64_t m = get_u64(in);
  if (n == 0 || m == 0 || n > (std::uint64_t{1} << 40) / m)
    throw IoError("binary matrix: implausible dimensions");
  MatrixXd values(static_cast<Index>(n), static_cast<Index>(m));
  for (Index j = 0; j < values.rows(); ++j)
    for (Index k = 0; k < values.cols(); ++k)
      values(j, k) = std::bit_cast<double>(get_u64(in));
  return values;
}

}  // namespace mixsqp::io
