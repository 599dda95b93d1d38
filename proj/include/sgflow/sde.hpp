// Small-learning-rate fluctuation engine for Ito SDEs
//
//   dw = f(tau, w) dtau + sqrt(gamma) G(tau, w) deta,   w in R^d, eta in R^n.
//
// The engine computes the gamma = 0 deterministic flow, linearized
// propagators along it, the Gaussian covariance of the sqrt(gamma)-scaled
// fluctuations around it, the resulting transition density, Euler-Maruyama
// path ensembles, and the exactly solvable one-dimensional linear SDE used
// as an oracle.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "sgflow/types.hpp"

namespace sgflow::sde {

struct SdeSystem {
  int dim_state = 0;
  int dim_noise = 0;
  // drift f(tau, w) -> R^d
  std::function<Vector(double, const Vector&)> drift;
  // diffusion G(tau, w) -> R^{d x n}
  std::function<Matrix(double, const Vector&)> diffusion;
  // optional analytic Jacobian of the drift, df_i/dw_j -> R^{d x d}
  std::function<Matrix(double, const Vector&)> jacobian;
  // true when drift = -grad(potential); enables the improved-drift sampler
  bool conservative = false;

  /// Evaluates the drift and checks the declared dimension.
  Vector drift_at(double tau, const Vector& w) const;
  /// Evaluates the diffusion and checks the declared dimensions.
  Matrix diffusion_at(double tau, const Vector& w) const;
  /// Analytic Jacobian if present, else central finite differences.
  Matrix jacobian_at(double tau, const Vector& w) const;
};

/// Central finite-difference Jacobian of the drift. Relative step h_rel with
/// an absolute floor of 1e-8 per coordinate.
Matrix jacobian_fd(const SdeSystem& system, double tau, const Vector& w,
                   double h_rel = 1e-6);

/// Deterministic flow on a uniform grid with cached drift Jacobians.
struct OdeTrajectory {
  double t0 = 0.0;
  double t_end = 0.0;
  std::vector<double> grid;       // size steps + 1, uniform
  std::vector<Vector> states;     // w^ode at grid nodes
  std::vector<Matrix> jacobians;  // drift Jacobian at grid nodes

  double dt() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
  int steps() const { return static_cast<int>(grid.size()) - 1; }
  /// Nearest grid index. With on_grid_only, off-node times (beyond a
  /// 1e-6*dt snap) are rejected.
  int index_of(double t, bool on_grid_only) const;
  const Vector& state_at(double t) const { return states[index_of(t, false)]; }
};

/// Classical fourth-order Runge-Kutta on a uniform grid. Throws
/// DivergenceError naming the first non-finite time.
OdeTrajectory solve_ode(const SdeSystem& system, const Vector& w0, double t0,
                        double t_end, int steps);

/// One-step linearized propagator over [grid[k], grid[k+1]]: the matrix
/// exponential of dt/2 * (F_k + F_{k+1}), F being the cached drift Jacobian.
Matrix step_propagator(const OdeTrajectory& traj, int k);

/// Time-ordered propagator U(tau_to, tau_from), the ordered product of
/// step_propagator factors with the latest step leftmost. Both times snap to
/// the nearest grid node.
///
/// Sign convention: the exponent is the drift Jacobian itself. For gradient
/// systems (drift = -grad loss) this equals minus the loss Hessian, so the
/// propagator damps along stable flows.
Matrix propagator(const OdeTrajectory& traj, double tau_from, double tau_to);

struct FluctuationCovariance {
  double t = 0.0;
  double learning_rate = 0.0;  // gamma
  Matrix cov_z;                // covariance of the scaled fluctuation z(t)
  Matrix cov_w() const { return learning_rate * cov_z; }
};

/// Covariance of the scaled fluctuation z(t) around the deterministic flow:
///
///   cov_z(t) = integral_{t0}^{t} U(t,tau) G G^T(tau, w^ode(tau)) U(t,tau)^T dtau
///
/// accumulated by the composite trapezoid rule on the trajectory grid and
/// symmetrized. t must lie on the grid.
FluctuationCovariance fluctuation_covariance(const SdeSystem& system,
                                             const OdeTrajectory& traj, double t,
                                             double gamma);

/// As above, evaluated at several grid times in one forward sweep.
std::vector<FluctuationCovariance> fluctuation_covariance_profile(
    const SdeSystem& system, const OdeTrajectory& traj,
    const std::vector<double>& times, double gamma);

/// Gaussian transition density with mean w^ode(t) and covariance cov_w,
/// evaluated on the support subspace: eigenvalues below tol_rel * lambda_max
/// are truncated, the density uses the pseudo-inverse and pseudo-determinant
/// over the retained directions, and points with an off-support component
/// get density zero. A rank-zero covariance with w away from the mean throws
/// DegenerateDensityError.
double transition_density(const Vector& w, double t, const OdeTrajectory& traj,
                          const FluctuationCovariance& cov, double tol_rel = 1e-12);

struct PathEnsemble {
  double dt = 0.0;
  int steps = 0;
  int replicates = 0;
  double gamma = 0.0;
  double t0 = 0.0;
  Vector w0;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> replicate_seeds;  // derivation record
  // paths[r] is (steps + 1) x d; row k is the state at t0 + k * dt
  std::vector<Matrix> paths;

  double time_at(int k) const { return t0 + k * dt; }
  int index_of(double t) const;
};

/// Euler-Maruyama ensemble:
///
///   w_{k+1} = w_k + f dtau + sqrt(gamma) G deta_k,  deta_k ~ N(0, dtau I_n).
///
/// Replicate r draws from the stream derived from (seed, r), so the ensemble
/// is reproducible under any parallel schedule. With improved_drift set (the
/// system must be conservative) the drift is replaced by
/// f - (gamma/2) J_f f, the gradient of potential + (gamma/4)|grad|^2.
PathEnsemble sample_paths(const SdeSystem& system, const Vector& w0, double gamma,
                          double dtau, int n_steps, int replicates,
                          std::uint64_t seed, bool improved_drift = false,
                          double t0 = 0.0, int threads = 0);

struct FluctuationStats {
  Vector mean_dev;     // mean of z_r = (w_r(t) - w^ode(t)) / sqrt(gamma)
  Vector mean_se;      // standard error of the mean, per component
  Matrix sample_cov;   // sample covariance of z_r
  Matrix cov_se;       // approximate standard error per covariance entry
  int replicates = 0;
};

/// Statistics of the scaled deviations of an ensemble from the deterministic
/// flow at time t. For gamma = 0 the deviation is defined as zero. Requires
/// at least two replicates.
FluctuationStats empirical_fluctuation_stats(const PathEnsemble& ensemble,
                                             const OdeTrajectory& traj, double gamma,
                                             double t);

/// One-dimensional linear SDE  dw = h(tau)(y - w) dtau + sqrt(gamma) sigma(tau) deta.
struct LinearSde1d {
  std::function<double(double)> h;
  std::function<double(double)> sigma;
  double y = 0.0;
  double w0 = 0.0;
  double t0 = 0.0;
  double gamma = 0.0;
};

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact law of the linear SDE at time t:
///   mean     = y + (w0 - y) exp(-int_{t0}^{t} h)
///   variance = gamma int_{t0}^{t} sigma(u)^2 exp(-2 int_{u}^{t} h) du
/// with adaptive quadrature to absolute tolerance 1e-10.
MeanVariance linear_sde_exact(const LinearSde1d& sde, double t);

/// The same SDE expressed as a SdeSystem (analytic Jacobian -h, conservative).
SdeSystem linear_sde_system(const LinearSde1d& sde);

}  // namespace sgflow::sde
