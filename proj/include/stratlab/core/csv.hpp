#pragma once

#include <span>
#include <string>
#include <vector>

namespace stratlab {

/// Numeric CSV table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws ConfigError if absent.
  std::size_t column(const std::string& name) const;
};

/// Reads a comma-separated file; throws ConfigError on malformed content.
CsvTable read_csv(const std::string& path);

/// Writes values with 17 significant digits.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Shortest round-trip decimal representation ("%.17g").
std::string format_double(double v);

}  // namespace stratlab
