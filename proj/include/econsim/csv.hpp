#pragma once

#include <string>
#include <vector>

#include "econsim/matrix.hpp"

namespace econsim {

struct CsvTable {
  std::vector<std::string> header;  // empty when the file has no header row
  std::vector<std::vector<std::string>> rows;

  // Column index by header name; throws IoError when absent.
  std::size_t column(const std::string& name) const;
};

// Reads a comma-separated file. `expect_header` controls whether the first
// row is treated as column names. Handles CRLF and trims surrounding spaces;
// quoted fields are not needed by any format this project reads or writes.
CsvTable read_csv(const std::string& path, bool expect_header = true);

// Parses an unadorned numeric grid (no header) into a Matrix.
Matrix read_csv_matrix(const std::string& path);

// Shortest-exact formatting for doubles: round-trips bit-for-bit and always
// produces the same text for the same value, which the output determinism
// contract relies on.
std::string format_double(double v);

}  // namespace econsim
