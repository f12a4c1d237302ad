#include "econsim/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "econsim/errors.hpp"

namespace econsim {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw IoError("csv: no column named '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::string& path, bool expect_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open csv file '" + path + "'");
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (first && expect_header) {
      table.header = std::move(cells);
    } else {
      table.rows.push_back(std::move(cells));
    }
    first = false;
  }
  return table;
}

Matrix read_csv_matrix(const std::string& path) {
  CsvTable t = read_csv(path, false);
  if (t.rows.empty()) throw IoError("csv matrix '" + path + "' is empty");
  const std::size_t cols = t.rows.front().size();
  Matrix m(t.rows.size(), cols);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i].size() != cols) {
      throw IoError("csv matrix '" + path + "': ragged row " + std::to_string(i));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      char* end = nullptr;
      m.at(i, j) = std::strtod(t.rows[i][j].c_str(), &end);
      if (end == t.rows[i][j].c_str()) {
        throw IoError("csv matrix '" + path + "': non-numeric cell at row " +
                      std::to_string(i));
      }
    }
  }
  return m;
}

std::string format_double(double v) {
  char buf[40];
  // Shortest representation that round-trips exactly.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace econsim
