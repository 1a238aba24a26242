#include "rope/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rope/errors.hpp"

namespace rope {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

namespace {

// Streams are working data, not reports: full round-trip precision.
std::string format_double_exact(double value) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace

std::string join_csv(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

double parse_double(const std::string& cell, std::size_t line_no) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    std::ostringstream msg;
    msg << "line " << line_no << ": cannot parse '" << cell << "' as a number";
    throw ParseError(msg.str());
  }
  return value;
}

}  // namespace

void write_stream_csv(const std::string& path,
                      const std::vector<Observation>& observations,
                      const std::vector<bool>* outlier_flags) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  if (observations.empty()) throw DataError("stream export: no observations");
  const Eigen::Index d = observations.front().dim();

  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < d; ++j)
    header.push_back("x_" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < d; ++j)
    header.push_back("z_" + std::to_string(j + 1));
  header.push_back("b");
  if (outlier_flags) header.push_back("is_outlier");
  out << join_csv(header) << '\n';

  for (std::size_t i = 0; i < observations.size(); ++i) {
    const Observation& obs = observations[i];
    std::vector<std::string> cells;
    for (Eigen::Index j = 0; j < d; ++j)
      cells.push_back(format_double_exact(obs.x(j)));
    for (Eigen::Index j = 0; j < d; ++j)
      cells.push_back(format_double_exact(obs.z(j)));
    cells.push_back(format_double_exact(obs.b));
    if (outlier_flags) cells.push_back((*outlier_flags)[i] ? "1" : "0");
    out << join_csv(cells) << '\n';
  }
}

StreamFile read_stream_csv(const std::string& path, int expected_dim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");

  std::string line;
  if (!std::getline(in, line)) throw ParseError("line 1: missing header row");
  const std::vector<std::string> header = split_csv(line);

  // Header must be x_1..x_d, z_1..z_d, b [, is_outlier].
  int d = 0;
  while (d < static_cast<int>(header.size()) &&
         header[d] == "x_" + std::to_string(d + 1))
    ++d;
  if (d == 0) throw ParseError("line 1: header must start with x_1");
  StreamFile file;
  const std::size_t base = static_cast<std::size_t>(2 * d);
  bool shape_ok = header.size() >= base + 1 && header[base] == "b";
  for (int j = 0; shape_ok && j < d; ++j)
    if (header[d + j] != "z_" + std::to_string(j + 1)) shape_ok = false;
  if (shape_ok && header.size() == base + 2 && header[base + 1] == "is_outlier")
    file.has_outlier_column = true;
  else if (shape_ok && header.size() != base + 1)
    shape_ok = false;
  if (!shape_ok)
    throw ParseError("line 1: header must be x_1..x_d,z_1..z_d,b[,is_outlier]");
  if (expected_dim > 0 && d != expected_dim) {
    std::ostringstream msg;
    msg << "dimension mismatch: file has d=" << d << ", configured d="
        << expected_dim;
    throw ConfigError(msg.str());
  }

  const std::size_t expected_cells = header.size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != expected_cells) {
      std::ostringstream msg;
      msg << "line " << line_no << ": expected " << expected_cells
          << " fields, found " << cells.size();
      throw ParseError(msg.str());
    }
    Observation obs;
    obs.x.resize(d);
    obs.z.resize(d);
    for (int j = 0; j < d; ++j) obs.x(j) = parse_double(cells[j], line_no);
    for (int j = 0; j < d; ++j) obs.z(j) = parse_double(cells[d + j], line_no);
    obs.b = parse_double(cells[static_cast<std::size_t>(2 * d)], line_no);
    file.observations.push_back(std::move(obs));
  }
  return file;
}

}  // namespace rope
