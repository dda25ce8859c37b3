#include "ionfringe/interference.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "ionfringe/errors.hpp"

namespace ionfringe {

CoherenceProfile make_profile(ProfileKind kind, int n_ions,
                              const std::vector<int>& incoherent_indices) {
  if (n_ions < 1) throw ValidationError("profile needs at least one ion");
  CoherenceProfile profile;
  profile.kind = kind;
  profile.fraction.assign(n_ions, 1.0);
  switch (kind) {
    case ProfileKind::uniform:
      break;
    case ProfileKind::subset_incoherent:
      for (int idx : incoherent_indices) {
        if (idx < 1 || idx > n_ions)
          throw ValidationError("incoherent ion index out of range");
        profile.fraction[idx - 1] = 0.0;
      }
      break;
    case ProfileKind::gaussian_edge:
    case ProfileKind::inverted_gaussian: {
      const std::vector<double> u = solve_positions(n_ions);
      const double edge = std::max(std::fabs(u.front()), std::fabs(u.back()));
      if (edge == 0.0) break;  // single ion, profile is flat
      const double e2 = edge * edge;
      for (int j = 0; j < n_ions; ++j) {
        const double r = u[j] * u[j] / e2;
        profile.fraction[j] = kind == ProfileKind::gaussian_edge
                                  ? std::exp(-r)
                                  : std::exp(-(1.0 - r));
      }
      break;
    }
  }
  return profile;
}

double dephasing_contrast(const DephasingConfig& deph, const OpticsConfig& cfg) {
  double ax = 0.0, rad = 0.0;
  for (const auto& m : deph.mode_variances) {
    if (!(m.variance >= 0.0))
      throw ValidationError("mode variance must be non-negative");
    (m.axis == ModeAxis::axial ? ax : rad) += m.variance;
  }
  const double k = 2.0 * constants::pi / cfg.wavelength;
  const double proj_ax = 1.0 - std::cos(cfg.theta);
  const double proj_rad = std::sin(cfg.theta);
  const double arg =
      k * k * (proj_ax * proj_ax * ax + proj_rad * proj_rad * rad) / 2.0;
  return deph.saturation_visibility_factor * std::exp(-arg);
}

FitParams FitParams::neutral(const OpticsConfig& cfg) {
  FitParams p;
  p.theta = cfg.theta;
  p.sigma_z = cfg.beam_sigma_z;
  return p;
}

double coherent_intensity(const std::vector<double>& phases,
                          const std::vector<double>& amplitudes) {
  if (phases.size() != amplitudes.size())
    throw ValidationError("phase and amplitude lists differ in length");
  std::complex<double> field(0.0, 0.0);
  for (std::size_t j = 0; j < phases.size(); ++j)
    field += amplitudes[j] * std::exp(std::complex<double>(0.0, phases[j]));
  return std::norm(field);
}

PatternModel::PatternModel(const TrapConfig& trap, int n_ions,
                           const OpticsConfig& optics, const CoherenceProfile& profile,
                           const DephasingConfig& deph)
    : trap_(trap), n_ions_(n_ions), optics_(optics), profile_(profile), deph_(deph),
      u_(solve_positions(n_ions)) {
  if (static_cast<int>(profile_.fraction.size()) != n_ions)
    throw ValidationError("coherence profile does not match the ion count");
  for (double c : profile_.fraction)
    if (!(c >= 0.0) || !(c <= 1.0))
      throw ValidationError("coherent fractions must lie in [0, 1]");
}

namespace {

struct PointTerms {
  double field2;      // |sum sqrt(c) A e^{i phi}|^2
  double auto_coh;    // sum c A^2
  double auto_incoh;  // sum (1 - c) A^2
};

OpticsConfig effective_optics(const OpticsConfig& base, const FitParams& p) {
  OpticsConfig optics = base;
  optics.theta = p.theta;
  optics.beam_sigma_z = p.sigma_z;
  return optics;
}

PointTerms evaluate_terms(const TrapConfig& trap, const std::vector<double>& u,
                          const CoherenceProfile& profile, const OpticsConfig& optics,
                          double u_tip, const FitParams& p) {
  const double f_z =
      axial_frequency(trap, u_tip + p.delta_u) * trap.axial_scale(static_cast<int>(u.size()));
  const double scale = length_scale(trap, f_z);

  std::complex<double> field(0.0, 0.0);
  PointTerms t{0.0, 0.0, 0.0};
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double z = scale * u[j];
    double a = beam_amplitude(optics, z);
    if (optics.detection_envelope) a *= detection_coupling(optics, z);
    const double c = profile.fraction[j];
    field += std::sqrt(c) * a *
             std::exp(std::complex<double>(0.0, relative_phase(optics, z)));
    t.auto_coh += c * a * a;
    t.auto_incoh += (1.0 - c) * a * a;
  }
  t.field2 = std::norm(field);
  return t;
}

}  // namespace

// The contrast factor follows the effective angle, so a fit that frees theta
// stays self-consistent between phases and dephasing.
double PatternModel::shape(double u_tip, const FitParams& p) const {
  const OpticsConfig optics = effective_optics(optics_, p);
  const PointTerms t = evaluate_terms(trap_, u_, profile_, optics, u_tip, p);
  const double v = dephasing_contrast(deph_, optics);
  return t.auto_coh + v * (t.field2 - t.auto_coh);
}

double PatternModel::incoherent_auto(double u_tip, const FitParams& p) const {
  const OpticsConfig optics = effective_optics(optics_, p);
  return evaluate_terms(trap_, u_, profile_, optics, u_tip, p).auto_incoh;
}

double PatternModel::observed(double u_tip, const FitParams& p) const {
  const OpticsConfig optics = effective_optics(optics_, p);
  const PointTerms t = evaluate_terms(trap_, u_, profile_, optics, u_tip, p);
  const double v = dephasing_contrast(deph_, optics);
  return p.i_incoh + t.auto_incoh +
         p.kappa * (t.auto_coh + v * (t.field2 - t.auto_coh));
}

std::vector<PatternPoint> PatternModel::pattern(const std::vector<double>& u_grid,
                                                const FitParams& p) const {
  std::vector<PatternPoint> out;
  out.reserve(u_grid.size());
  for (double u_tip : u_grid) out.push_back({u_tip, observed(u_tip, p)});
  return out;
}

std::vector<PatternPoint> observed_pattern(const TrapConfig& trap, const IonChain& chain,
                                           const OpticsConfig& optics,
                                           const CoherenceProfile& profile,
                                           const DephasingConfig& deph, const FitParams& p,
                                           const std::vector<double>& u_grid) {
  const PatternModel model(trap, chain.n_ions, optics, profile, deph);
  return model.pattern(u_grid, p);
}

}  // namespace ionfringe
