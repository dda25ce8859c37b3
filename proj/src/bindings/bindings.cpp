// Python bindings for the main operations: chain geometry, pattern
// simulation, fitting, visibility and peak-width analysis, the jitter Monte
// Carlo, and the command-line entry point.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "ionfringe/analysis.hpp"
#include "ionfringe/chain.hpp"
#include "ionfringe/cli.hpp"
#include "ionfringe/config.hpp"
#include "ionfringe/errors.hpp"
#include "ionfringe/fitting.hpp"
#include "ionfringe/interference.hpp"
#include "ionfringe/optics.hpp"
#include "ionfringe/scan_io.hpp"
#include "ionfringe/trap.hpp"

namespace py = pybind11;
using namespace ionfringe;

namespace {

CoherenceProfile profile_from(const std::string& name, int n_ions,
                              const std::vector<int>& incoherent_indices) {
  if (name == "uniform") return make_profile(ProfileKind::uniform, n_ions);
  if (name == "gauss-edge")
    return make_profile(ProfileKind::gaussian_edge, n_ions);
  if (name == "gauss-edge-inverted")
    return make_profile(ProfileKind::inverted_gaussian, n_ions);
  if (name == "incoherent-subset")
    return make_profile(ProfileKind::subset_incoherent, n_ions,
                        incoherent_indices);
  throw ValidationError("unknown profile: " + name);
}

std::vector<FreeParam> free_from(const std::vector<std::string>& names) {
  std::vector<FreeParam> out;
  for (const auto& name : names) {
    if (name == "theta") out.push_back(FreeParam::theta);
    else if (name == "sigma_z") out.push_back(FreeParam::sigma_z);
    else if (name == "delta_u") out.push_back(FreeParam::delta_u);
    else throw ValidationError("unknown free parameter: " + name);
  }
  return out;
}

PatternModel model_from(const RunConfig& cfg, int n_ions,
                        const std::string& profile,
                        const std::vector<int>& incoherent_indices,
                        double beam_sigma_m) {
  OpticsConfig optics = cfg.optics;
  if (beam_sigma_m > 0.0) optics.beam_sigma_z = beam_sigma_m;
  return PatternModel(cfg.trap, n_ions, optics,
                      profile_from(profile, n_ions, incoherent_indices),
                      cfg.dephasing);
}

py::dict fit_to_dict(const FitResult& fit) {
  py::dict d;
  d["i_incoh"] = fit.params.i_incoh;
  d["kappa"] = fit.params.kappa;
  d["theta"] = fit.params.theta;
  d["sigma_z"] = fit.params.sigma_z;
  d["delta_u"] = fit.params.delta_u;
  d["err_i_incoh"] = fit.err_i_incoh;
  d["err_kappa"] = fit.err_kappa;
  d["err_theta"] = fit.err_theta;
  d["err_sigma_z"] = fit.err_sigma_z;
  d["err_delta_u"] = fit.err_delta_u;
  d["chi2"] = fit.chi2;
  d["dof"] = fit.dof;
  d["converged"] = fit.converged;
  d["on_boundary"] = fit.on_boundary;
  d["pinned"] = fit.pinned;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ion chain interference toolkit";
  m.attr("__version__") = "1.0.0";

  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError",
                                           PyExc_RuntimeError);

  py::class_<RunConfig>(m, "Config")
      .def_property_readonly(
          "wavelength_m",
          [](const RunConfig& c) { return c.optics.wavelength; })
      .def_property_readonly(
          "theta_rad", [](const RunConfig& c) { return c.optics.theta; })
      .def_property_readonly("background_cps", [](const RunConfig& c) {
        return c.analysis.background_cps;
      });

  m.def("default_config", &default_config,
        "Built-in configuration used when no file is given.");
  m.def("load_config", &load_config, py::arg("path"),
        "Load an INI configuration file.");

  m.def("solve_positions", &solve_positions, py::arg("n_ions"),
        "Dimensionless equilibrium positions of a linear chain.");
  m.def(
      "chain_positions_m",
      [](const RunConfig& cfg, int n_ions, double u_tip) {
        const IonChain chain = chain_geometry(cfg.trap, n_ions, u_tip);
        std::vector<double> z(chain.u.size());
        for (std::size_t i = 0; i < z.size(); ++i)
          z[i] = chain.z(static_cast<int>(i));
        return z;
      },
      py::arg("config"), py::arg("n_ions"), py::arg("u_tip_v"),
      "Equilibrium positions in meters at a tip voltage.");
  m.def(
      "axial_frequency_hz",
      [](const RunConfig& cfg, double u_tip) {
        return axial_frequency(cfg.trap, u_tip);
      },
      py::arg("config"), py::arg("u_tip_v"),
      "Axial center-of-mass frequency from the calibration curve.");
  m.def(
      "fringe_period_m",
      [](const RunConfig& cfg) { return fringe_period(cfg.optics); },
      py::arg("config"),
      "Pattern period in inter-ion distance, wavelength/(1 - cos theta).");
  m.def("coherent_intensity", &coherent_intensity, py::arg("phases"),
        py::arg("amplitudes"), "|sum_j A_j exp(i phi_j)|^2");

  m.def(
      "pattern",
      [](const RunConfig& cfg, int n_ions, const std::vector<double>& u_grid,
         double kappa, double i_incoh, double delta_u,
         const std::string& profile, const std::vector<int>& incoherent_indices,
         double beam_sigma_m) {
        const PatternModel model =
            model_from(cfg, n_ions, profile, incoherent_indices, beam_sigma_m);
        FitParams p = FitParams::neutral(model.optics());
        p.kappa = kappa;
        p.i_incoh = i_incoh;
        p.delta_u = delta_u;
        std::vector<double> out;
        out.reserve(u_grid.size());
        for (const PatternPoint& pt : model.pattern(u_grid, p))
          out.push_back(pt.intensity);
        return out;
      },
      py::arg("config"), py::arg("n_ions"), py::arg("u_grid_v"),
      py::arg("kappa") = 1.0, py::arg("i_incoh") = 0.0,
      py::arg("delta_u") = 0.0, py::arg("profile") = "uniform",
      py::arg("incoherent_indices") = std::vector<int>{},
      py::arg("beam_sigma_m") = 0.0,
      "Simulated scan intensities on a voltage grid.");

  m.def(
      "fit_csv",
      [](const RunConfig& cfg, const std::string& path,
         const std::vector<std::string>& free, int n_ions,
         const std::string& profile, const std::vector<int>& incoherent_indices,
         double beam_sigma_m, std::uint64_t seed) {
        MeasuredScan scan = load_scan(path);
        if (n_ions > 0) scan.n_ions = n_ions;
        if (scan.n_ions < 1)
          throw ValidationError(
              "scan metadata lacks the ion count; pass n_ions");
        const PatternModel model = model_from(cfg, scan.n_ions, profile,
                                              incoherent_indices, beam_sigma_m);
        return fit_to_dict(fit_full(scan, model, free_from(free), seed));
      },
      py::arg("config"), py::arg("path"),
      py::arg("free") = std::vector<std::string>{}, py::arg("n_ions") = 0,
      py::arg("profile") = "uniform",
      py::arg("incoherent_indices") = std::vector<int>{},
      py::arg("beam_sigma_m") = 0.0, py::arg("seed") = 1,
      "Fit a measured scan CSV; returns parameters, errors and chi2.");

  m.def(
      "visibility_extremal_csv",
      [](const std::string& path) {
        const MeasuredScan scan = load_scan(path);
        const VisibilityEstimate raw = visibility_extremal(scan);
        py::dict d;
        d["v"] = raw.v;
        d["i_max"] = raw.i_max;
        d["i_min"] = raw.i_min;
        d["background"] = raw.background;
        d["clamped"] = raw.clamped;
        return d;
      },
      py::arg("path"),
      "Extremal-point visibility of a measured scan after background "
      "subtraction.");
  m.def("background_subtracted_visibility", &background_subtracted_visibility,
        py::arg("v_raw"), py::arg("extremes_sum"), py::arg("background"),
        "Rescale a raw visibility to its background-free value.");

  m.def(
      "max_peak_width",
      [](const RunConfig& cfg, int n_ions, double u_lo, double u_hi,
         int points) {
        const PatternModel model = model_from(cfg, n_ions, "uniform", {}, 0.0);
        std::vector<double> grid(points);
        for (int i = 0; i < points; ++i)
          grid[i] = u_lo + (u_hi - u_lo) * i / (points - 1);
        const std::vector<PatternPoint> pat =
            model.pattern(grid, FitParams::neutral(model.optics()));
        const FwhmResult r =
            fwhm_of_max_peak(pat, cfg.trap, n_ions, model.optics());
        py::dict d;
        d["u_peak_v"] = r.u_peak;
        d["width_v"] = r.width_v;
        d["width_m"] = r.width_m;
        d["width_rad"] = r.width_rad;
        d["pair_distance_m"] = r.pair_distance;
        d["truncated"] = r.left_truncated || r.right_truncated;
        return d;
      },
      py::arg("config"), py::arg("n_ions"), py::arg("u_lo_v"),
      py::arg("u_hi_v"), py::arg("points") = 200001,
      "Full width at half maximum of the tallest fringe over a voltage "
      "window.");

  m.def(
      "peak_scaling",
      [](const RunConfig& cfg, const std::vector<int>& n_list, double u_lo,
         double u_hi) {
        std::vector<py::dict> out;
        for (const ScalingPoint& p :
             peak_intensity_scaling(n_list, cfg.trap, cfg.optics, u_lo, u_hi)) {
          py::dict d;
          d["n_ions"] = p.n_ions;
          d["max_intensity"] = p.max_intensity;
          d["u_peak_v"] = p.u_peak;
          out.push_back(d);
        }
        return out;
      },
      py::arg("config"), py::arg("n_list"), py::arg("u_lo_v"),
      py::arg("u_hi_v"),
      "Brightest-peak intensity over a voltage window per ion count.");

  m.def(
      "jitter_mc",
      [](const RunConfig& cfg, int n_ions, double sigma_p_m, int realizations,
         std::uint64_t seed, double u_lo, double u_hi) {
        MonteCarloConfig mc;
        mc.sigma_p = sigma_p_m;
        mc.realizations = realizations;
        mc.seed = seed;
        const JitterResult r =
            jittered_equidistant_mc(mc, n_ions, cfg.trap, cfg.optics, u_lo, u_hi);
        py::dict d;
        d["mean_max"] = r.mean_max;
        d["sd_max"] = r.sd_max;
        d["maxima"] = r.maxima;
        return d;
      },
      py::arg("config"), py::arg("n_ions"), py::arg("sigma_p_m"),
      py::arg("realizations") = 100, py::arg("seed") = 1,
      py::arg("u_lo_v") = 5.0, py::arg("u_hi_v") = 900.0,
      "Monte Carlo of the brightest peak for jittered equidistant chains.");

  m.def("run_cli", &run_cli, py::arg("args"),
        "Invoke the command line with an argument list; returns the exit "
        "code.");
}
