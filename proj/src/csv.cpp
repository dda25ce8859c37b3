#include "ionfringe/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ionfringe/errors.hpp"

namespace ionfringe {

std::string format_cell(const CsvCell& cell) {
  if (const double* d = std::get_if<double>(&cell)) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", *d);
    return buf;
  }
  if (const long long* i = std::get_if<long long>(&cell))
    return std::to_string(*i);
  const std::string& s = std::get<std::string>(cell);
  if (s.find_first_of(",\n\r") != std::string::npos)
    throw ValidationError("text cell contains a separator");
  return s;
}

void write_csv(const std::string& path, const std::vector<std::string>& comments,
               const std::vector<std::string>& header,
               const std::vector<std::vector<CsvCell>>& rows) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  // Binary mode keeps LF endings on every platform.
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  for (const auto& c : comments) out << "# " << c << "\n";
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw ValidationError("row width differs from header width");
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_cell(row[i]);
    out << "\n";
  }
  if (!out) throw ValidationError("write failed for " + path);
}

}  // namespace ionfringe
