#include "ionfringe/scan_io.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ionfringe/csv.hpp"
#include "ionfringe/errors.hpp"

namespace ionfringe {

namespace {

[[noreturn]] void fail(const std::string& path, int line, const std::string& what) {
  throw ValidationError(path + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& path, int line, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    fail(path, line, "not a number: '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

MeasuredScan load_scan(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path);

  MeasuredScan scan;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (text[0] == '#') {
      const auto eq = text.find('=');
      if (eq == std::string::npos)
        fail(path, lineno, "metadata comment must be '# key=value'");
      const std::string key = trim(text.substr(1, eq - 1));
      const std::string value = trim(text.substr(eq + 1));
      if (key == "ions") {
        const double v = parse_double(path, lineno, value);
        if (v < 1 || v != static_cast<long long>(v))
          fail(path, lineno, "ions must be a positive integer");
        scan.n_ions = static_cast<int>(v);
      } else if (key == "background_cps") {
        scan.background_cps = parse_double(path, lineno, value);
        if (scan.background_cps < 0.0)
          fail(path, lineno, "background_cps must be non-negative");
      } else if (key == "integration_s") {
        scan.integration_s = parse_double(path, lineno, value);
        if (scan.integration_s < 0.0)
          fail(path, lineno, "integration_s must be non-negative");
      } else {
        fail(path, lineno, "unknown metadata key '" + key + "'");
      }
      continue;
    }
    if (!header_seen) {
      if (text != "u_tip_V,rate_cps,stderr_cps")
        fail(path, lineno,
             "expected header 'u_tip_V,rate_cps,stderr_cps', got '" + text + "'");
      header_seen = true;
      continue;
    }
    const auto cols = split(text, ',');
    if (cols.size() != 3) fail(path, lineno, "expected 3 columns");
    MeasuredScan::Point p;
    p.u_tip = parse_double(path, lineno, trim(cols[0]));
    p.rate = parse_double(path, lineno, trim(cols[1]));
    p.err = parse_double(path, lineno, trim(cols[2]));
    if (p.rate < 0.0) fail(path, lineno, "rate_cps must be non-negative");
    if (!(p.err > 0.0)) fail(path, lineno, "stderr_cps must be positive");
    scan.points.push_back(p);
  }
  if (!header_seen)
    throw ValidationError(path + ": missing header 'u_tip_V,rate_cps,stderr_cps'");
  if (scan.points.empty()) throw ValidationError(path + ": no data rows");
  std::stable_sort(scan.points.begin(), scan.points.end(),
                   [](const auto& a, const auto& b) { return a.u_tip < b.u_tip; });
  return scan;
}

void save_scan(const std::string& path, const MeasuredScan& scan) {
  std::vector<std::string> comments;
  comments.push_back("ions=" + std::to_string(scan.n_ions));
  comments.push_back("background_cps=" + format_cell(CsvCell{scan.background_cps}));
  comments.push_back("integration_s=" + format_cell(CsvCell{scan.integration_s}));
  std::vector<std::vector<CsvCell>> rows;
  rows.reserve(scan.points.size());
  for (const auto& p : scan.points)
    rows.push_back({CsvCell{p.u_tip}, CsvCell{p.rate}, CsvCell{p.err}});
  write_csv(path, comments, {"u_tip_V", "rate_cps", "stderr_cps"}, rows);
}

}  // namespace ionfringe
