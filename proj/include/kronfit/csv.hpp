#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kronfit/moments.hpp"

namespace kronfit {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace
    size_t b = cell.find_first_not_of(" \t\r");
    size_t e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace detail

// Rectangular numeric CSV, rows = time, columns = series; a single leading
// header row is detected by its first cell failing to parse as a number.
inline Panel ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EmptyFile(path);

  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  long expect = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    double first;
    if (rows.empty() && names.empty() && !detail::parse_double(cells[0], first)) {
      names = cells;
      expect = static_cast<long>(cells.size());
      continue;
    }
    if (expect < 0) expect = static_cast<long>(cells.size());
    if (static_cast<long>(cells.size()) != expect)
      throw RaggedRows(lineno, expect, static_cast<long>(cells.size()));
    std::vector<double> row(cells.size());
    for (size_t c = 0; c < cells.size(); ++c) {
      if (!detail::parse_double(cells[c], row[c]))
        throw NonNumericCell(lineno, static_cast<long>(c) + 1, cells[c]);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyFile(path);

  Panel panel;
  panel.names = std::move(names);
  panel.data = Matrix(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (size_t t = 0; t < rows.size(); ++t)
    for (size_t i = 0; i < rows[t].size(); ++i)
      panel.data(static_cast<int>(t), static_cast<int>(i)) = rows[t][i];
  return panel;
}

// Square numeric CSV without header; used for user-supplied weight matrices.
inline Matrix read_csv_matrix(const std::string& path) {
  const Panel p = ingest_csv(path);
  return p.data;
}

}  // namespace kronfit
