#pragma once

#include <string>
#include <vector>

namespace flr::csv {

/// One header row of labels followed by numeric rows.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Parses a comma-separated file; malformed cells raise ingest_error
/// naming line and column. Every data row must match the header width.
Table read(const std::string& path);

/// Unparsed cells for tables that mix strings and numbers.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

RawTable read_raw(const std::string& path);

/// Strict full-cell numeric parse; raises ingest_error naming the location.
double parse_cell(const std::string& cell, const std::string& path,
                  std::size_t lineno, std::size_t column);

/// Writes with 17 significant digits so doubles round-trip bit-exactly.
void write(const std::string& path, const Table& table);

std::string format_double(double v);

}  // namespace flr::csv
