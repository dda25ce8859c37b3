#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ionfringe/cli.hpp"
#include "ionfringe/scan_io.hpp"

using namespace ionfringe;

namespace {

std::filesystem::path cli_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "ionfringe_cli";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

// rows of a csv file: comments skipped, header included as first row
std::vector<std::vector<std::string>> read_rows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> row;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("positions subcommand emits the dimensionless and metric columns") {
  const auto out = (cli_dir() / "pos2.csv").string();
  const int code = run_cli({"positions", "--ions", "2", "--out", out});
  REQUIRE(code == 0);
  const auto rows = read_rows(out);
  REQUIRE(rows.size() == 3);  // header + 2 ions
  CHECK(rows[0] == std::vector<std::string>{"index", "u_dimensionless", "z_m"});
  const double u0 = std::stod(rows[1][1]);
  const double u1 = std::stod(rows[2][1]);
  CHECK(u0 == doctest::Approx(-0.6299605249474366).epsilon(1e-12));
  CHECK(u1 == doctest::Approx(0.6299605249474366).epsilon(1e-12));
  // metric positions scale both ions identically
  const double z0 = std::stod(rows[1][2]);
  const double z1 = std::stod(rows[2][2]);
  CHECK(z0 == doctest::Approx(-z1).epsilon(1e-12));
  CHECK(z1 / u1 > 0.0);
}

TEST_CASE("positions rejects invalid ion counts with exit code 2") {
  const auto out = (cli_dir() / "pos_bad.csv").string();
  CHECK(run_cli({"positions", "--ions", "0", "--out", out}) == 2);
  CHECK(run_cli({"positions", "--ions", "999", "--out", out}) == 2);
}

TEST_CASE("malformed command lines exit with code 2") {
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"frobnicate"}) == 2);
  CHECK(run_cli({"positions", "--nope"}) == 2);
  CHECK(run_cli({"positions"}) == 2);  // missing required --ions
  CHECK(run_cli({"fit", "--data", "/nonexistent/scan.csv"}) == 2);
  CHECK(run_cli({"simulate", "--ions", "2", "--profile", "nonsense"}) == 2);
  CHECK(run_cli({"analyze", "bogus-mode"}) == 2);
  CHECK(run_cli({"montecarlo", "--sigma-p", "2parsec"}) == 2);
}

TEST_CASE("help exits cleanly") {
  CHECK(run_cli({"--help"}) == 0);
}

TEST_CASE("noiseless patterns depend on geometry but not on the seed") {
  const auto a = (cli_dir() / "pat_a.csv").string();
  const auto b = (cli_dir() / "pat_b.csv").string();
  const auto c = (cli_dir() / "pat_c.csv").string();
  REQUIRE(run_cli({"simulate", "--ions", "2", "--u-lo", "4.5", "--u-hi", "12",
                   "--points", "200", "--seed", "1", "--out", a}) == 0);
  REQUIRE(run_cli({"simulate", "--ions", "2", "--u-lo", "4.5", "--u-hi", "12",
                   "--points", "200", "--seed", "99", "--out", b}) == 0);
  REQUIRE(run_cli({"simulate", "--ions", "3", "--u-lo", "4.5", "--u-hi", "12",
                   "--points", "200", "--seed", "1", "--out", c}) == 0);
  CHECK(read_bytes(a) == read_bytes(b));
  CHECK(read_bytes(a) != read_bytes(c));
  const auto rows = read_rows(a);
  CHECK(rows[0] == std::vector<std::string>{"u_tip_V", "intensity"});
  CHECK(rows.size() == 201);
}

TEST_CASE("noisy scans are seeded and loadable") {
  const auto a = (cli_dir() / "scan_a.csv").string();
  const auto b = (cli_dir() / "scan_b.csv").string();
  const auto c = (cli_dir() / "scan_c.csv").string();
  const std::vector<std::string> base = {
      "simulate", "--ions", "2",    "--u-lo",  "4.5", "--u-hi", "12",
      "--points", "80",     "--kappa", "8",   "--i-incoh", "14.4",
      "--noise-s", "5"};
  auto with = [&](const std::string& seed, const std::string& out) {
    std::vector<std::string> args = base;
    args.insert(args.end(), {"--seed", seed, "--out", out});
    return run_cli(args);
  };
  REQUIRE(with("7", a) == 0);
  REQUIRE(with("7", b) == 0);
  REQUIRE(with("8", c) == 0);
  CHECK(read_bytes(a) == read_bytes(b));
  CHECK(read_bytes(a) != read_bytes(c));

  const MeasuredScan scan = load_scan(a);
  CHECK(scan.n_ions == 2);
  CHECK(scan.integration_s == 5.0);
  CHECK(scan.background_cps == 9.3);  // config default rides along
  REQUIRE(scan.points.size() == 80);
  for (const auto& p : scan.points) {
    CHECK(p.rate >= 0.0);
    CHECK(p.err > 0.0);
  }
}

TEST_CASE("fit subcommand writes parameter and residual tables") {
  const auto dir = cli_dir() / "fitrun";
  std::filesystem::create_directories(dir);
  const auto scan_path = (dir / "scan.csv").string();
  REQUIRE(run_cli({"simulate", "--ions", "2", "--u-lo", "4.5", "--u-hi", "12",
                   "--points", "100", "--kappa", "8", "--i-incoh", "14.4",
                   "--noise-s", "5", "--seed", "3", "--out", scan_path}) == 0);
  REQUIRE(run_cli({"fit", "--data", scan_path, "--free", "delta_u", "--seed",
                   "3", "--out", dir.string()}) == 0);

  const auto params = read_rows((dir / "fit_params.csv").string());
  REQUIRE(params.size() >= 6);
  CHECK(params[0] == std::vector<std::string>{"parameter", "value", "stderr"});
  bool saw_kappa = false, saw_theta = false;
  for (std::size_t i = 1; i < params.size(); ++i) {
    if (params[i][0] == "kappa_cps") {
      saw_kappa = true;
      CHECK(std::stod(params[i][1]) > 0.0);
    }
    if (params[i][0] == "theta_rad") saw_theta = true;
  }
  CHECK(saw_kappa);
  CHECK(saw_theta);

  const auto residuals = read_rows((dir / "fit_residuals.csv").string());
  CHECK(residuals.size() == 101);  // header + one row per point
}

TEST_CASE("fit is deterministic for a fixed seed") {
  const auto dir_a = cli_dir() / "fit_da";
  const auto dir_b = cli_dir() / "fit_db";
  std::filesystem::create_directories(dir_a);
  std::filesystem::create_directories(dir_b);
  const auto scan_path = (cli_dir() / "fit_det_scan.csv").string();
  REQUIRE(run_cli({"simulate", "--ions", "2", "--u-lo", "4.5", "--u-hi", "12",
                   "--points", "90", "--kappa", "8", "--i-incoh", "14.4",
                   "--noise-s", "5", "--seed", "5", "--out", scan_path}) == 0);
  REQUIRE(run_cli({"fit", "--data", scan_path, "--free", "theta,delta_u",
                   "--seed", "11", "--out", dir_a.string()}) == 0);
  REQUIRE(run_cli({"fit", "--data", scan_path, "--free", "theta,delta_u",
                   "--seed", "11", "--out", dir_b.string()}) == 0);
  CHECK(read_bytes((dir_a / "fit_params.csv").string()) ==
        read_bytes((dir_b / "fit_params.csv").string()));
  CHECK(read_bytes((dir_a / "fit_residuals.csv").string()) ==
        read_bytes((dir_b / "fit_residuals.csv").string()));
}

TEST_CASE("visibility analysis reports extremal and model estimates") {
  const auto scan_path = (cli_dir() / "vis_scan.csv").string();
  const auto out = (cli_dir() / "vis.csv").string();
  REQUIRE(run_cli({"simulate", "--ions", "2", "--u-lo", "4.5", "--u-hi", "12",
                   "--points", "120", "--kappa", "8", "--i-incoh", "14.4",
                   "--noise-s", "5", "--seed", "2", "--out", scan_path}) == 0);
  REQUIRE(run_cli({"analyze", "visibility", "--data", scan_path, "--out", out}) ==
          0);
  const auto rows = read_rows(out);
  REQUIRE(rows.size() == 5);
  CHECK(rows[1][0] == "extremal_raw");
  CHECK(rows[2][0] == "extremal_subtracted");
  CHECK(rows[3][0] == "model_raw");
  CHECK(rows[4][0] == "model_subtracted");
  for (int i = 1; i <= 4; ++i) {
    const double v = std::stod(rows[i][1]);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
  // subtracting a positive background raises the visibility
  CHECK(std::stod(rows[2][1]) > std::stod(rows[1][1]));
  CHECK(std::stod(rows[4][1]) > std::stod(rows[3][1]));
}

TEST_CASE("fwhm analysis emits one row per ion count") {
  const auto out = (cli_dir() / "fwhm.csv").string();
  REQUIRE(run_cli({"analyze", "fwhm", "--ions-list", "2,3", "--u-lo", "4.5",
                   "--u-hi", "12", "--out", out}) == 0);
  const auto rows = read_rows(out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][0] == "2");
  CHECK(rows[2][0] == "3");
  const double width_rad_2 = std::stod(rows[1][4]);
  CHECK(width_rad_2 == doctest::Approx(3.14159265358979).epsilon(0.05));
  CHECK(std::stod(rows[2][4]) < width_rad_2);  // narrower for more ions
}

TEST_CASE("scaling analysis keeps peaks between the chain bounds") {
  const auto out = (cli_dir() / "scaling.csv").string();
  REQUIRE(run_cli({"analyze", "scaling", "--ions-list", "2,3,4", "--u-lo", "5",
                   "--u-hi", "60", "--out", out}) == 0);
  const auto rows = read_rows(out);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double n = std::stod(rows[i][3]);
    const double peak = std::stod(rows[i][1]);
    CHECK(peak > n);
    CHECK(peak < n * n);
  }
}

TEST_CASE("montecarlo subcommand is deterministic and parses jitter units") {
  const auto a = (cli_dir() / "mc_a.csv").string();
  const auto b = (cli_dir() / "mc_b.csv").string();
  const std::vector<std::string> base = {
      "montecarlo", "--ions-list", "2,3",       "--sigma-p", "0.5lambda",
      "--realizations", "6",       "--u-lo",    "5",         "--u-hi", "60",
      "--seed", "4"};
  auto with = [&](const std::string& out) {
    std::vector<std::string> args = base;
    args.insert(args.end(), {"--out", out});
    return run_cli(args);
  };
  REQUIRE(with(a) == 0);
  REQUIRE(with(b) == 0);
  CHECK(read_bytes(a) == read_bytes(b));
  const auto rows = read_rows(a);
  REQUIRE(rows.size() == 3);
  // sigma_p column carries the resolved metric value: half a wavelength
  CHECK(std::stod(rows[1][1]) == doctest::Approx(397e-9 / 2.0).epsilon(1e-12));
}

TEST_CASE("config file settings propagate into simulated patterns") {
  const auto cfg_path = (cli_dir() / "angle.ini").string();
  {
    std::ofstream out(cfg_path, std::ios::binary);
    out << "[optics]\ntheta_deg = 50\n";
  }
  const auto a = (cli_dir() / "cfg_a.csv").string();
  const auto b = (cli_dir() / "cfg_b.csv").string();
  REQUIRE(run_cli({"simulate", "--ions", "2", "--u-lo", "4.5", "--u-hi", "12",
                   "--points", "50", "--out", a}) == 0);
  REQUIRE(run_cli({"simulate", "--ions", "2", "--u-lo", "4.5", "--u-hi", "12",
                   "--points", "50", "--config", cfg_path, "--out", b}) == 0);
  CHECK(read_bytes(a) != read_bytes(b));
  CHECK(run_cli({"simulate", "--ions", "2", "--config",
                 (cli_dir() / "missing.ini").string(), "--out", a}) == 2);
}
