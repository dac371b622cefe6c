#include "dipmem/csv.hpp"

#include "dipmem/errors.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

namespace dipmem {

namespace {
std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}
}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw IoError(fmt::format("CSV has no column '{}'", name));
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += quote(table.header[i]);
  }
  out += "\r\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += fmt::format("{:.17g}", row[i]);
    }
    out += "\r\n";
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot write {}", path.string()));
  f << to_csv(table);
  if (!f) throw IoError(fmt::format("failed writing {}", path.string()));
}

CsvTable parse_csv(const std::string& text, const std::string& origin) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (t.header.empty()) {
      for (auto& c : cells) t.header.push_back(trim(c));
      continue;
    }
    if (cells.size() != t.header.size())
      throw IoError(fmt::format("{}:{}: expected {} columns, found {}", origin, lineno, t.header.size(),
                                cells.size()));
    std::vector<double> row;
    for (auto& c : cells) {
      const std::string s = trim(c);
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw IoError(fmt::format("{}:{}: '{}' is not a number", origin, lineno, s));
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw IoError(fmt::format("{}: missing header row", origin));
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot open {}", path.string()));
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str(), path.string());
}

}  // namespace dipmem
