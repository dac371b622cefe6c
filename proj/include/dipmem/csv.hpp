#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dipmem {

/// Numeric table with a mandatory header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

/// RFC-4180 style: comma separated, header quoted only when needed, floats
/// written with 17 significant digits.
std::string to_csv(const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

CsvTable parse_csv(const std::string& text, const std::string& origin = "<memory>");
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace dipmem
