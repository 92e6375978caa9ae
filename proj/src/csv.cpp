#include "spinsim/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "spinsim/common.hpp"

namespace spinsim::csv {

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

void write(const std::filesystem::path& path, const Table& table) {
  std::ofstream f(path);
  if (!f) throw IoError("csv: cannot open for write: " + path.string());
  auto write_row = [&f](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) f << ',';
      f << row[i];
    }
    f << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
  if (!f) throw IoError("csv: write failed: " + path.string());
}

Table read(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("csv: cannot open: " + path.string());
  Table table;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && f.eof()) break;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line.empty() || line.back() == ',') fields.emplace_back();
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace spinsim::csv
