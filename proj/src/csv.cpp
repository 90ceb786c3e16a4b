#include "flr/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "flr/errors.hpp"

namespace flr::csv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

RawTable read_raw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ingest_error("cannot open '" + path + "'");
  RawTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      std::ostringstream os;
      os << path << ":" << lineno << ": row has " << cells.size()
         << " cells, header has " << table.header.size();
      throw ingest_error(os.str());
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw ingest_error(path + ": empty file");
  return table;
}

double parse_cell(const std::string& cell, const std::string& path,
                  std::size_t lineno, std::size_t column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size()) {
    std::ostringstream os;
    os << path << ":" << lineno << ": column " << column << ": non-numeric cell '"
       << cell << "'";
    throw ingest_error(os.str());
  }
  return v;
}

Table read(const std::string& path) {
  RawTable raw = read_raw(path);
  Table table;
  table.header = std::move(raw.header);
  table.rows.reserve(raw.rows.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    std::vector<double> row(raw.rows[r].size());
    for (std::size_t c = 0; c < row.size(); ++c)
      row[c] = parse_cell(raw.rows[r][c], path, r + 2, c + 1);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw ingest_error("cannot write '" + path + "'");
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ',';
    out << table.header[i];
  }
  out << '\n';
  for (const std::vector<double>& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_double(row[i]);
    }
    out << '\n';
  }
  if (!out) throw ingest_error("write failed for '" + path + "'");
}

}  // namespace flr::csv
