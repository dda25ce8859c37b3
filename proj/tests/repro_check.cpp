// Regenerates the shipped data tree into a temporary directory and verifies
// it matches data/ byte for byte, so the committed CSVs can never go stale
// relative to the code that claims to produce them.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "ionfringe/cli.hpp"

namespace fs = std::filesystem;

namespace {

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return "<unreadable:" + p.string() + ">";
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

int main() {
  const fs::path shipped = fs::path(IONFRINGE_SOURCE_DIR) / "data";
  const fs::path fresh = fs::temp_directory_path() / "ionfringe_repro_check";
  std::error_code ec;
  fs::remove_all(fresh, ec);
  fs::create_directories(fresh);

  const int code = ionfringe::run_cli({"repro", "--out", fresh.string()});
  if (code != 0) {
    std::printf("FAIL repro exited with %d\n", code);
    return 1;
  }
  if (!fs::exists(shipped)) {
    std::printf("FAIL shipped data directory missing: %s\n",
                shipped.string().c_str());
    return 1;
  }

  std::map<std::string, fs::path> a, b;
  for (auto& e : fs::recursive_directory_iterator(shipped))
    if (e.is_regular_file()) a[fs::relative(e.path(), shipped).string()] = e.path();
  for (auto& e : fs::recursive_directory_iterator(fresh))
    if (e.is_regular_file()) b[fs::relative(e.path(), fresh).string()] = e.path();

  int bad = 0;
  for (const auto& [rel, pa] : a) {
    const auto it = b.find(rel);
    if (it == b.end()) {
      std::printf("FAIL shipped file not regenerated: %s\n", rel.c_str());
      ++bad;
    } else if (file_bytes(pa) != file_bytes(it->second)) {
      std::printf("FAIL regenerated bytes differ: %s\n", rel.c_str());
      ++bad;
    }
  }
  for (const auto& [rel, pb] : b) {
    (void)pb;
    if (a.find(rel) == a.end()) {
      std::printf("FAIL regenerated file is not shipped: %s\n", rel.c_str());
      ++bad;
    }
  }
  if (bad == 0)
    std::printf("PASS shipped data tree matches a fresh regeneration "
                "(%zu files)\n",
                a.size());
  return bad == 0 ? 0 : 1;
}
