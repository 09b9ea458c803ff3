#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace idpoint {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Reads a numeric CSV whose first line is a header. Every data row must have
/// the header's column count.
CsvTable read_numeric_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal representation; fixed so that outputs are
/// byte-stable across runs.
std::string format_double(double value);

}  // namespace idpoint
