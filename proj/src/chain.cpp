#include "ionfringe/chain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ionfringe/errors.hpp"

namespace ionfringe {

double IonChain::min_spacing_u() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < u.size(); ++i) m = std::min(m, u[i] - u[i - 1]);
  return m;
}

double IonChain::mean_spacing_u() const {
  if (u.size() < 2) return 0.0;
  return (u.back() - u.front()) / static_cast<double>(u.size() - 1);
}

namespace {

void force_balance(const Eigen::VectorXd& u, Eigen::VectorXd& f) {
  const int n = static_cast<int>(u.size());
  for (int m = 0; m < n; ++m) {
    double s = u[m];
    for (int p = 0; p < n; ++p) {
      if (p == m) continue;
      const double d = u[m] - u[p];
      s -= (d > 0 ? 1.0 : -1.0) / (d * d);
    }
    f[m] = s;
  }
}

void jacobian(const Eigen::VectorXd& u, Eigen::MatrixXd& j) {
  const int n = static_cast<int>(u.size());
  j.setZero();
  for (int m = 0; m < n; ++m) {
    double diag = 1.0;
    for (int p = 0; p < n; ++p) {
      if (p == m) continue;
      const double d = u[m] - u[p];
      const double w = 2.0 / std::fabs(d * d * d);
      diag += w;
      j(m, p) = -w;
    }
    j(m, m) = diag;
  }
}

bool ascending(const Eigen::VectorXd& u) {
  for (int i = 1; i < u.size(); ++i)
    if (!(u[i] > u[i - 1])) return false;
  return true;
}

double potential(const Eigen::VectorXd& u) {
  double e = 0.5 * u.squaredNorm();
  for (int m = 0; m < u.size(); ++m)
    for (int p = m + 1; p < u.size(); ++p) e += 1.0 / (u[p] - u[m]);
  return e;
}

// Plain descent on the potential, used only when Newton stalls far from the
// solution. Keeps the ordering by backtracking.
void descend(Eigen::VectorXd& u, int iterations) {
  const int n = static_cast<int>(u.size());
  Eigen::VectorXd g(n), v(n);
  double step = 1e-3;
  for (int it = 0; it < iterations; ++it) {
    force_balance(u, g);  // gradient of the potential
    if (g.lpNorm<Eigen::Infinity>() < 1e-12) return;
    const double e0 = potential(u);
    double t = step;
    for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
      v = u - t * g;
      if (ascending(v) && potential(v) < e0) {
        u = v;
        step = std::min(t * 2.0, 1.0);
        break;
      }
    }
  }
}

}  // namespace

std::vector<double> solve_positions(int n) {
  if (n < 1 || n > 200)
    throw ValidationError("ion count must be between 1 and 200");
  if (n == 1) return {0.0};

  Eigen::VectorXd u(n);
  const double half = 0.6 * std::pow(static_cast<double>(n), 2.0 / 3.0);
  for (int i = 0; i < n; ++i)
    u[i] = -half + 2.0 * half * i / (n - 1);

  Eigen::VectorXd f(n), trial(n);
  Eigen::MatrixXd j(n, n);
  const double tol = 1e-11;
  bool used_fallback = false;
  force_balance(u, f);
  for (int it = 0; it < 400; ++it) {
    const double r0 = f.lpNorm<Eigen::Infinity>();
    if (r0 < tol) break;
    jacobian(u, j);
    const Eigen::VectorXd step = j.ldlt().solve(-f);
    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 50; ++bt, t *= 0.5) {
      trial = u + t * step;
      if (!ascending(trial)) continue;
      force_balance(trial, f);
      if (f.lpNorm<Eigen::Infinity>() < r0) {
        u = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (used_fallback) break;
      used_fallback = true;
      descend(u, 5000);
      force_balance(u, f);
    }
  }

  force_balance(u, f);
  const double residual = f.lpNorm<Eigen::Infinity>();
  if (!(residual < 1e-10))
    throw ConvergenceError("equilibrium residual " + std::to_string(residual) +
                           " for " + std::to_string(n) + " ions");
  for (int i = 0; i < n; ++i)
    if (std::fabs(u[i] + u[n - 1 - i]) > 1e-8)
      throw ConvergenceError("equilibrium lost reflection symmetry");

  return {u.data(), u.data() + n};
}

IonChain chain_geometry(const TrapConfig& trap, int n, double u_tip) {
  IonChain chain;
  chain.n_ions = n;
  chain.u_tip = u_tip;
  chain.f_z = axial_frequency(trap, u_tip) * trap.axial_scale(n);
  chain.scale = length_scale(trap, chain.f_z);
  chain.u = solve_positions(n);
  return chain;
}

}  // namespace ionfringe
