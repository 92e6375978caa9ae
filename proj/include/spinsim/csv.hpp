#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace spinsim::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

// Plain comma-separated values, no quoting: none of the fields written by
// this project contain commas.
void write(const std::filesystem::path& path, const Table& table);
Table read(const std::filesystem::path& path);

// Round-trip-exact double formatting (max_digits10).
std::string format_double(double v);

}  // namespace spinsim::csv
