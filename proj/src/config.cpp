#include "ionfringe/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "ionfringe/errors.hpp"

namespace ionfringe {

RunConfig default_config() {
  RunConfig cfg;
  const auto [a, u0] = calibrate_axial({{4.0, 60e3}, {900.0, 1044e3}});
  cfg.trap.calib_a = a;
  cfg.trap.calib_u0 = u0;
  cfg.dephasing.saturation_visibility_factor = 0.66;
  cfg.dephasing.mode_variances = {{ModeAxis::axial, 2.5e-15},
                                  {ModeAxis::radial, 1.6e-15}};
  return cfg;
}

namespace {

struct Entry {
  int line;
  std::string value;
};

using Section = std::map<std::string, Entry>;

[[noreturn]] void fail(const std::string& path, int line, const std::string& what) {
  throw ValidationError(path + ":" + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& path, int line, const std::string& text,
                 bool allow_inf = false) {
  if (allow_inf && (text == "inf" || text == "infinity"))
    return std::numeric_limits<double>::infinity();
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v))
    fail(path, line, "not a number: '" + text + "'");
  return v;
}

std::vector<double> to_list(const std::string& path, int line, const std::string& text) {
  std::vector<double> out;
  std::string cur;
  auto flush = [&]() {
    const std::string t = trim(cur);
    if (!t.empty()) out.push_back(to_double(path, line, t));
    cur.clear();
  };
  for (char c : text) {
    if (c == ',') flush();
    else cur += c;
  }
  flush();
  return out;
}

bool to_bool(const std::string& path, int line, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  fail(path, line, "expected true or false, got '" + text + "'");
}

// Pulls a key out of the section, tracking consumption so leftovers can be
// reported as unknown keys with their line numbers.
class KeyReader {
 public:
  KeyReader(const std::string& path, Section& section) : path_(path), section_(section) {}

  bool take(const std::string& key, Entry& out) {
    const auto it = section_.find(key);
    if (it == section_.end()) return false;
    out = it->second;
    section_.erase(it);
    return true;
  }

  void finish(const std::string& section_name) {
    if (section_.empty()) return;
    const auto& first = *section_.begin();
    fail(path_, first.second.line,
         "unknown key '" + first.first + "' in [" + section_name + "]");
  }

 private:
  const std::string& path_;
  Section& section_;
};

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path);

  std::map<std::string, Section> sections;
  std::set<std::string> known = {"trap", "optics", "dephasing", "analysis"};
  std::string line, current;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    if (text.front() == '[') {
      if (text.back() != ']') fail(path, lineno, "unterminated section header");
      current = trim(text.substr(1, text.size() - 2));
      if (!known.count(current))
        fail(path, lineno, "unknown section [" + current + "]");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) fail(path, lineno, "expected key = value");
    if (current.empty()) fail(path, lineno, "key outside any section");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) fail(path, lineno, "empty key");
    auto& section = sections[current];
    if (section.count(key)) fail(path, lineno, "duplicate key '" + key + "'");
    section[key] = {lineno, value};
  }

  RunConfig cfg = default_config();
  Entry e;

  {
    KeyReader r(path, sections["trap"]);
    if (r.take("ion_mass_u", e)) {
      const double v = to_double(path, e.line, e.value);
      if (!(v > 0.0)) fail(path, e.line, "ion_mass_u must be positive");
      cfg.trap.ion_mass = v * constants::atomic_mass_unit;
    }
    if (r.take("ion_charge_e", e)) {
      const double v = to_double(path, e.line, e.value);
      if (!(v > 0.0)) fail(path, e.line, "ion_charge_e must be positive");
      cfg.trap.ion_charge = v * constants::elementary_charge;
    }
    if (r.take("radial_freq_mhz", e)) {
      const double v = to_double(path, e.line, e.value);
      if (!(v > 0.0)) fail(path, e.line, "radial_freq_mhz must be positive");
      cfg.trap.radial_freq = v * 1e6;
    }
    bool have_u = false, have_f = false;
    std::vector<double> volts, freqs;
    if (r.take("calib_u_tip_v", e)) {
      volts = to_list(path, e.line, e.value);
      have_u = true;
    }
    if (r.take("calib_f_z_khz", e)) {
      freqs = to_list(path, e.line, e.value);
      have_f = true;
    }
    if (have_u != have_f)
      fail(path, e.line, "calib_u_tip_v and calib_f_z_khz must come together");
    if (have_u) {
      if (volts.size() != freqs.size())
        fail(path, e.line, "calibration lists differ in length");
      std::vector<CalibrationPoint> pts;
      for (std::size_t i = 0; i < volts.size(); ++i)
        pts.push_back({volts[i], freqs[i] * 1e3});
      const auto [a, u0] = calibrate_axial(pts);  // validates the rest
      cfg.trap.calib_a = a;
      cfg.trap.calib_u0 = u0;
    }
    bool have_n = false, have_s = false;
    std::vector<double> ns, fs;
    if (r.take("com_scale_n", e)) {
      ns = to_list(path, e.line, e.value);
      have_n = true;
    }
    if (r.take("com_scale_factor", e)) {
      fs = to_list(path, e.line, e.value);
      have_s = true;
    }
    if (have_n != have_s || (have_n && ns.size() != fs.size()))
      fail(path, e.line, "com_scale_n and com_scale_factor must pair up");
    if (have_n) {
      cfg.trap.com_scale_n.clear();
      cfg.trap.com_scale_factor.clear();
      for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] < 1 || ns[i] != static_cast<int>(ns[i]))
          fail(path, e.line, "com_scale_n entries must be positive integers");
        if (!(fs[i] > 0.0)) fail(path, e.line, "com_scale_factor entries must be positive");
        cfg.trap.com_scale_n.push_back(static_cast<int>(ns[i]));
        cfg.trap.com_scale_factor.push_back(fs[i]);
      }
    }
    r.finish("trap");
  }

  {
    KeyReader r(path, sections["optics"]);
    if (r.take("wavelength_nm", e)) {
      const double v = to_double(path, e.line, e.value);
      if (!(v > 0.0)) fail(path, e.line, "wavelength_nm must be positive");
      cfg.optics.wavelength = v * 1e-9;
    }
    if (r.take("theta_deg", e)) {
      const double v = to_double(path, e.line, e.value);
      if (!(v > 0.0) || !(v < 180.0))
        fail(path, e.line, "theta_deg must lie in (0, 180)");
      cfg.optics.theta = v * constants::pi / 180.0;
    }
    if (r.take("beam_sigma_um", e)) {
      const double v = to_double(path, e.line, e.value, true);
      if (!(v > 0.0)) fail(path, e.line, "beam_sigma_um must be positive or inf");
      cfg.optics.beam_sigma_z = std::isinf(v) ? v : v * 1e-6;
    }
    if (r.take("mode_waist_um", e)) {
      const double v = to_double(path, e.line, e.value);
      if (!(v > 0.0)) fail(path, e.line, "mode_waist_um must be positive");
      cfg.optics.mode_waist = v * 1e-6;
    }
    if (r.take("rayleigh_mm", e)) {
      const double v = to_double(path, e.line, e.value);
      if (!(v > 0.0)) fail(path, e.line, "rayleigh_mm must be positive");
      cfg.optics.rayleigh_range = v * 1e-3;
    }
    if (r.take("gaussian_convention", e)) {
      if (e.value == "paper") cfg.optics.gaussian_convention = GaussianConvention::paper;
      else if (e.value == "standard")
        cfg.optics.gaussian_convention = GaussianConvention::standard;
      else
        fail(path, e.line, "gaussian_convention must be 'paper' or 'standard'");
    }
    if (r.take("detection_envelope", e))
      cfg.optics.detection_envelope = to_bool(path, e.line, e.value);
    r.finish("optics");
  }

  {
    KeyReader r(path, sections["dephasing"]);
    if (r.take("saturation_visibility_factor", e)) {
      const double v = to_double(path, e.line, e.value);
      if (!(v > 0.0) || !(v <= 1.0))
        fail(path, e.line, "saturation_visibility_factor must lie in (0, 1]");
      cfg.dephasing.saturation_visibility_factor = v;
    }
    const bool had_axial = sections["dephasing"].count("axial_variances_m2") > 0;
    const bool had_radial = sections["dephasing"].count("radial_variances_m2") > 0;
    if (had_axial || had_radial) cfg.dephasing.mode_variances.clear();
    if (r.take("axial_variances_m2", e))
      for (double v : to_list(path, e.line, e.value)) {
        if (v < 0.0) fail(path, e.line, "variances must be non-negative");
        cfg.dephasing.mode_variances.push_back({ModeAxis::axial, v});
      }
    if (r.take("radial_variances_m2", e))
      for (double v : to_list(path, e.line, e.value)) {
        if (v < 0.0) fail(path, e.line, "variances must be non-negative");
        cfg.dephasing.mode_variances.push_back({ModeAxis::radial, v});
      }
    r.finish("dephasing");
  }

  {
    KeyReader r(path, sections["analysis"]);
    if (r.take("scan_u_lo_v", e)) cfg.analysis.scan_u_lo = to_double(path, e.line, e.value);
    if (r.take("scan_u_hi_v", e)) cfg.analysis.scan_u_hi = to_double(path, e.line, e.value);
    if (r.take("fwhm_u_lo_v", e)) cfg.analysis.fwhm_u_lo = to_double(path, e.line, e.value);
    if (r.take("fwhm_u_hi_v", e)) cfg.analysis.fwhm_u_hi = to_double(path, e.line, e.value);
    if (r.take("background_cps", e)) {
      const double v = to_double(path, e.line, e.value);
      if (v < 0.0) fail(path, e.line, "background_cps must be non-negative");
      cfg.analysis.background_cps = v;
    }
    if (r.take("seed", e)) {
      const double v = to_double(path, e.line, e.value);
      if (v < 0 || v != static_cast<std::uint64_t>(v))
        fail(path, e.line, "seed must be a non-negative integer");
      cfg.analysis.seed = static_cast<std::uint64_t>(v);
    }
    if (r.take("mc_realizations", e)) {
      const double v = to_double(path, e.line, e.value);
      if (v < 1 || v != static_cast<int>(v))
        fail(path, e.line, "mc_realizations must be a positive integer");
      cfg.analysis.mc_realizations = static_cast<int>(v);
    }
    if (r.take("fwhm_pair", e)) {
      if (e.value == "innermost") cfg.analysis.fwhm_pair = PairConvention::innermost;
      else if (e.value == "mean") cfg.analysis.fwhm_pair = PairConvention::mean;
      else
        fail(path, e.line, "fwhm_pair must be 'innermost' or 'mean'");
    }
    if (r.take("grid_per_fringe", e)) {
      const double v = to_double(path, e.line, e.value);
      if (v < 4 || v != static_cast<int>(v))
        fail(path, e.line, "grid_per_fringe must be an integer of at least 4");
      cfg.analysis.grid_per_fringe = static_cast<int>(v);
    }
    r.finish("analysis");
  }

  if (!(cfg.analysis.scan_u_lo < cfg.analysis.scan_u_hi) ||
      !(cfg.analysis.scan_u_lo > cfg.trap.calib_u0))
    throw ValidationError(path + ": scan voltage window must be increasing and above the calibration offset");
  if (!(cfg.analysis.fwhm_u_lo < cfg.analysis.fwhm_u_hi) ||
      !(cfg.analysis.fwhm_u_lo > cfg.trap.calib_u0))
    throw ValidationError(path + ": peak-width voltage window must be increasing and above the calibration offset");

  return cfg;
}

}  // namespace ionfringe
