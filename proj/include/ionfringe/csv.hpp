#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace ionfringe {

// One CSV cell. Doubles are rendered in scientific notation with 17
// significant digits so emitted files are byte-identical for identical
// inputs and round-trip exactly.
using CsvCell = std::variant<double, long long, std::string>;

std::string format_cell(const CsvCell& cell);

// Writes header and rows with LF line endings regardless of platform.
// Comment lines, when given, go first as "# key=value".
void write_csv(const std::string& path, const std::vector<std::string>& comments,
               const std::vector<std::string>& header,
               const std::vector<std::vector<CsvCell>>& rows);

}  // namespace ionfringe
