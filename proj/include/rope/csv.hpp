#pragma once

#include <string>
#include <vector>

#include "rope/observation.hpp"

namespace rope {

// Floats are printed with 9 significant digits everywhere.
std::string format_double(double value);

std::string join_csv(const std::vector<std::string>& cells);

// Stream file: header x_1..x_d,z_1..z_d,b with an optional trailing
// is_outlier column for audit.
void write_stream_csv(const std::string& path,
                      const std::vector<Observation>& observations,
                      const std::vector<bool>* outlier_flags = nullptr);

struct StreamFile {
  std::vector<Observation> observations;
  bool has_outlier_column = false;
};

// Throws ParseError naming the offending line; the expected dimension is
// checked against the header before any row is parsed.
StreamFile read_stream_csv(const std::string& path, int expected_dim);

}  // namespace rope
