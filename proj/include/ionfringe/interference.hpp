#pragma once

#include <vector>

#include "ionfringe/chain.hpp"
#include "ionfringe/optics.hpp"

namespace ionfringe {

enum class ProfileKind { uniform, subset_incoherent, gaussian_edge, inverted_gaussian };

// Per-ion coherent fraction c_j in [0, 1]. Fraction c_j of ion j's intensity
// interferes; the remainder contributes a flat per-ion offset.
struct CoherenceProfile {
  ProfileKind kind = ProfileKind::uniform;
  std::vector<double> fraction;  // size n_ions
};

// Profiles are functions of the dimensionless equilibrium positions, so the
// per-ion fractions are fixed along a voltage scan.
//   uniform:            c_j = 1
//   subset_incoherent:  c_j = 0 for the listed 1-based ion indices, else 1
//   gaussian_edge:      c_j = exp(-u_j^2 / u_edge^2), outermost ion at 1/e
//   inverted_gaussian:  c_j = exp(-(u_edge^2 - u_j^2) / u_edge^2), 1/e at center
CoherenceProfile make_profile(ProfileKind kind, int n_ions,
                              const std::vector<int>& incoherent_indices = {});

enum class ModeAxis { axial, radial };

// Residual Gaussian motion of a relative coordinate, variance in m^2.
struct ModeVariance {
  ModeAxis axis;
  double variance;
};

struct DephasingConfig {
  // fixed contrast reduction from excited-state populations at the working
  // saturation, supplied as an input rather than modeled
  double saturation_visibility_factor = 1.0;
  std::vector<ModeVariance> mode_variances;
};

// Interference contrast from thermal position spread,
//   V = factor * exp(-k^2 [ (1-cos theta)^2 sum sig_ax^2 + sin^2 theta sum sig_rad^2 ] / 2)
// with k = 2 pi / lambda. Axial modes enter through the path-difference
// projection (1 - cos theta), radial modes through the excitation projection
// sin theta.
double dephasing_contrast(const DephasingConfig& deph, const OpticsConfig& cfg);

// Linear scaling from normalized intensity to measured rate plus the
// geometry parameters a fit may vary. theta and sigma_z override the optics
// values during evaluation; delta_u shifts every tip voltage.
struct FitParams {
  double i_incoh = 0.0;  // flat offset, counts/s
  double kappa = 1.0;    // counts/s per normalized coherent intensity
  double theta = 0.0;    // rad
  double sigma_z = 0.0;  // m
  double delta_u = 0.0;  // V

  static FitParams neutral(const OpticsConfig& cfg);
};

struct PatternPoint {
  double u_tip;      // V
  double intensity;  // counts/s for scaled patterns, normalized otherwise
};

// |sum_j A_j exp(i phi_j)|^2
double coherent_intensity(const std::vector<double>& phases,
                          const std::vector<double>& amplitudes);

// Scan model bundling chain geometry and emission settings. The dimensionless
// positions are solved once; each voltage only rescales the chain.
class PatternModel {
 public:
  PatternModel(const TrapConfig& trap, int n_ions, const OpticsConfig& optics,
               const CoherenceProfile& profile, const DephasingConfig& deph);

  // Dephased coherent part, the shape multiplied by kappa:
  //   sum_j c_j A_j^2 + V * ( |sum_j sqrt(c_j) A_j e^{i phi_j}|^2 - sum_j c_j A_j^2 )
  // so the contrast factor V acts on the cross terms only.
  double shape(double u_tip, const FitParams& p) const;

  // Incoherent auto-scatter sum_j (1 - c_j) A_j^2 in normalized units.
  double incoherent_auto(double u_tip, const FitParams& p) const;

  // i_incoh + incoherent_auto + kappa * shape
  double observed(double u_tip, const FitParams& p) const;

  std::vector<PatternPoint> pattern(const std::vector<double>& u_grid,
                                    const FitParams& p) const;

  int n_ions() const { return n_ions_; }
  const std::vector<double>& positions() const { return u_; }
  const TrapConfig& trap() const { return trap_; }
  const OpticsConfig& optics() const { return optics_; }
  const CoherenceProfile& profile() const { return profile_; }

 private:
  TrapConfig trap_;
  int n_ions_;
  OpticsConfig optics_;
  CoherenceProfile profile_;
  DephasingConfig deph_;
  std::vector<double> u_;  // dimensionless equilibrium positions
};

// Observable pattern on a voltage grid, per point
//   I(U) = i_incoh + sum_j (1-c_j) A_j^2 + kappa * shape(U)
// with shape as documented on PatternModel::shape and the chain rescaled at
// U + delta_u. The chain argument fixes n_ions; positions are re-derived.
std::vector<PatternPoint> observed_pattern(const TrapConfig& trap, const IonChain& chain,
                                           const OpticsConfig& optics,
                                           const CoherenceProfile& profile,
                                           const DephasingConfig& deph, const FitParams& p,
                                           const std::vector<double>& u_grid);

}  // namespace ionfringe
