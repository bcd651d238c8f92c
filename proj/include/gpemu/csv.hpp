#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gpemu/linalg.hpp"

namespace gpemu {

/// Numeric CSV table with a header row and '.' decimals.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;  // rows x header.size()

  Eigen::Index column_index(const std::string& name) const;
};

/// Throws InvalidArgument on malformed input (ragged rows, non-numeric
/// fields, missing header).
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

std::string to_csv(const CsvTable& table);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Header names prefix1..prefixN.
std::vector<std::string> numbered_header(const std::string& prefix, Eigen::Index count);

}  // namespace gpemu
