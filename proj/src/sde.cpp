#include "sgflow/sde.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sgflow/parallel.hpp"
#include "sgflow/quadrature.hpp"
#include "sgflow/rng.hpp"

namespace sgflow::sde {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

std::string format_time(double t) {
  std::ostringstream os;
  os.precision(12);
  os << t;
  return os.str();
}

}  // namespace

Vector SdeSystem::drift_at(double tau, const Vector& w) const {
  Vector f = drift(tau, w);
  if (f.size() != dim_state) {
    throw ValidationError("drift returned dimension " + std::to_string(f.size()) +
                          ", declared dim_state " + std::to_string(dim_state));
  }
  return f;
}

Matrix SdeSystem::diffusion_at(double tau, const Vector& w) const {
  Matrix g = diffusion(tau, w);
  if (g.rows() != dim_state || g.cols() != dim_noise) {
    throw ValidationError("diffusion returned " + std::to_string(g.rows()) + "x" +
                          std::to_string(g.cols()) + ", declared " +
                          std::to_string(dim_state) + "x" + std::to_string(dim_noise));
  }
  return g;
}

Matrix SdeSystem::jacobian_at(double tau, const Vector& w) const {
  if (jacobian) {
    Matrix j = jacobian(tau, w);
    if (j.rows() != dim_state || j.cols() != dim_state) {
      throw ValidationError("jacobian returned wrong dimensions");
    }
    return j;
  }
  return jacobian_fd(*this, tau, w);
}

Matrix jacobian_fd(const SdeSystem& system, double tau, const Vector& w, double h_rel) {
  if (!(h_rel > 0.0)) throw ValidationError("jacobian_fd: h_rel must be positive");
  const int d = system.dim_state;
  Matrix jac(d, d);
  Vector wp = w, wm = w;
  for (int j = 0; j < d; ++j) {
    const double h = std::max(h_rel * std::abs(w(j)), 1e-8);
    wp(j) = w(j) + h;
    wm(j) = w(j) - h;
    jac.col(j) = (system.drift_at(tau, wp) - system.drift_at(tau, wm)) / (2.0 * h);
    wp(j) = w(j);
    wm(j) = w(j);
  }
  return jac;
}

int OdeTrajectory::index_of(double t, bool on_grid_only) const {
  if (grid.empty()) throw ValidationError("trajectory has an empty grid");
  const double h = dt();
  const double pos = h > 0.0 ? (t - t0) / h : 0.0;
  long k = std::lround(pos);
  k = std::clamp<long>(k, 0, static_cast<long>(grid.size()) - 1);
  if (on_grid_only) {
    const double tol = 1e-6 * std::max(h, 1e-300);
    if (std::abs(t - grid[static_cast<std::size_t>(k)]) > tol) {
      throw ValidationError("time " + format_time(t) + " is not a grid node");
    }
  } else {
    if (t < t0 - 0.5 * h || t > t_end + 0.5 * h) {
      throw ValidationError("time " + format_time(t) + " outside trajectory range");
    }
  }
  return static_cast<int>(k);
}

OdeTrajectory solve_ode(const SdeSystem& system, const Vector& w0, double t0,
                        double t_end, int steps) {
  if (steps < 1) throw ValidationError("solve_ode: steps must be >= 1");
  if (!(t_end > t0)) throw ValidationError("solve_ode: t_end must exceed t0");
  if (w0.size() != system.dim_state) {
    throw ValidationError("solve_ode: w0 dimension does not match dim_state");
  }
  const double h = (t_end - t0) / steps;
  OdeTrajectory traj;
  traj.t0 = t0;
  traj.t_end = t_end;
  traj.grid.resize(steps + 1);
  traj.states.reserve(steps + 1);
  traj.jacobians.reserve(steps + 1);

  Vector w = w0;
  for (int k = 0; k <= steps; ++k) {
    const double tk = t0 + k * h;
    traj.grid[k] = tk;
    if (!all_finite(w)) {
      throw DivergenceError("solve_ode: non-finite state at tau = " + format_time(tk));
    }
    traj.states.push_back(w);
    traj.jacobians.push_back(system.jacobian_at(tk, w));
    if (k == steps) break;
    const Vector k1 = system.drift_at(tk, w);
    const Vector k2 = system.drift_at(tk + 0.5 * h, w + 0.5 * h * k1);
    const Vector k3 = system.drift_at(tk + 0.5 * h, w + 0.5 * h * k2);
    const Vector k4 = system.drift_at(tk + h, w + h * k3);
    w += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return traj;
}

Matrix step_propagator(const OdeTrajectory& traj, int k) {
  const double h = traj.dt();
  const Matrix exponent =
      0.5 * h * (traj.jacobians[static_cast<std::size_t>(k)] +
                 traj.jacobians[static_cast<std::size_t>(k) + 1]);
  return exponent.exp();
}

Matrix propagator(const OdeTrajectory& traj, double tau_from, double tau_to) {
  if (tau_from > tau_to) {
    throw ValidationError("propagator: tau_from must not exceed tau_to");
  }
  const int k_from = traj.index_of(tau_from, false);
  const int k_to = traj.index_of(tau_to, false);
  const int d = static_cast<int>(traj.states.front().size());
  Matrix u = Matrix::Identity(d, d);
  for (int k = k_from; k < k_to; ++k) {
    u = step_propagator(traj, k) * u;  // latest step leftmost
  }
  return u;
}

namespace {

std::vector<FluctuationCovariance> covariance_sweep(const SdeSystem& system,
                                                    const OdeTrajectory& traj,
                                                    const std::vector<int>& stops,
                                                    double gamma) {
  const int d = system.dim_state;
  const double h = traj.dt();
  const int last = stops.empty() ? 0 : *std::max_element(stops.begin(), stops.end());

  std::vector<Matrix> omega;  // G G^T at grid nodes up to `last`
  omega.reserve(last + 1);
  for (int k = 0; k <= last; ++k) {
    const Matrix g = system.diffusion_at(traj.grid[k], traj.states[k]);
    omega.push_back(g * g.transpose());
  }

  std::vector<Matrix> at_stop(stops.size());
  Matrix acc = Matrix::Zero(d, d);
  for (std::size_t s = 0; s < stops.size(); ++s) {
    if (stops[s] == 0) at_stop[s] = acc;
  }
  for (int k = 0; k < last; ++k) {
    const Matrix e = step_propagator(traj, k);
    acc = e * acc * e.transpose() +
          0.5 * h * (e * omega[k] * e.transpose() + omega[k + 1]);
    for (std::size_t s = 0; s < stops.size(); ++s) {
      if (stops[s] == k + 1) at_stop[s] = acc;
    }
  }

  std::vector<FluctuationCovariance> out(stops.size());
  for (std::size_t s = 0; s < stops.size(); ++s) {
    FluctuationCovariance cov;
    cov.t = traj.grid[stops[s]];
    cov.learning_rate = gamma;
    cov.cov_z = 0.5 * (at_stop[s] + at_stop[s].transpose());
    out[s] = std::move(cov);
  }
  return out;
}

}  // namespace

FluctuationCovariance fluctuation_covariance(const SdeSystem& system,
                                             const OdeTrajectory& traj, double t,
                                             double gamma) {
  if (gamma < 0.0) throw ValidationError("fluctuation_covariance: gamma must be >= 0");
  const int stop = traj.index_of(t, true);
  return covariance_sweep(system, traj, {stop}, gamma).front();
}

std::vector<FluctuationCovariance> fluctuation_covariance_profile(
    const SdeSystem& system, const OdeTrajectory& traj,
    const std::vector<double>& times, double gamma) {
  std::vector<int> stops;
  stops.reserve(times.size());
  for (double t : times) stops.push_back(traj.index_of(t, true));
  return covariance_sweep(system, traj, stops, gamma);
}

double transition_density(const Vector& w, double t, const OdeTrajectory& traj,
                          const FluctuationCovariance& cov, double tol_rel) {
  if (std::abs(cov.t - t) > 1e-9 * std::max(1.0, std::abs(t))) {
    throw ValidationError("transition_density: covariance evaluated at a different time");
  }
  if (!(cov.learning_rate > 0.0)) {
    throw ValidationError("transition_density: gamma must be positive");
  }
  const Vector mean = traj.states[static_cast<std::size_t>(traj.index_of(t, false))];
  const Vector dev = w - mean;
  const Matrix cw = cov.cov_w();

  Eigen::SelfAdjointEigenSolver<Matrix> es(cw);
  const Vector evals = es.eigenvalues();
  const double lambda_max = std::max(evals.maxCoeff(), 0.0);
  const double cutoff = tol_rel * lambda_max;

  double log_det = 0.0;
  double quad = 0.0;
  double off_sq = 0.0;
  int rank = 0;
  for (int i = 0; i < evals.size(); ++i) {
    const double proj = es.eigenvectors().col(i).dot(dev);
    if (evals(i) > cutoff && evals(i) > 0.0) {
      ++rank;
      log_det += std::log(evals(i));
      quad += proj * proj / evals(i);
    } else {
      off_sq += proj * proj;
    }
  }
  const double off_tol = 1e-8 * (1.0 + dev.norm());
  if (rank == 0 && std::sqrt(off_sq) > off_tol) {
    throw DegenerateDensityError(
        "transition_density: covariance has rank zero away from the flow");
  }
  if (std::sqrt(off_sq) > off_tol) return 0.0;
  constexpr double kLog2Pi = 1.8378770664093454836;
  return std::exp(-0.5 * (quad + rank * kLog2Pi + log_det));
}

int PathEnsemble::index_of(double t) const {
  const long k = std::lround((t - t0) / dt);
  if (k < 0 || k > steps) throw ValidationError("ensemble: time outside range");
  if (std::abs(t0 + static_cast<double>(k) * dt - t) > 1e-6 * dt) {
    throw ValidationError("ensemble: time is not a step multiple");
  }
  return static_cast<int>(k);
}

PathEnsemble sample_paths(const SdeSystem& system, const Vector& w0, double gamma,
                          double dtau, int n_steps, int replicates, std::uint64_t seed,
                          bool improved_drift, double t0, int threads) {
  if (!(dtau > 0.0)) throw ValidationError("sample_paths: dtau must be positive");
  if (gamma < 0.0) throw ValidationError("sample_paths: gamma must be >= 0");
  if (replicates < 1) throw ValidationError("sample_paths: replicates must be >= 1");
  if (improved_drift && !system.conservative) {
    throw ValidationError("sample_paths: improved drift needs a conservative system");
  }

  PathEnsemble ens;
  ens.dt = dtau;
  ens.steps = n_steps;
  ens.replicates = replicates;
  ens.gamma = gamma;
  ens.t0 = t0;
  ens.w0 = w0;
  ens.master_seed = seed;
  ens.replicate_seeds.resize(replicates);
  ens.paths.assign(replicates, Matrix());
  for (int r = 0; r < replicates; ++r) {
    ens.replicate_seeds[r] = derive_stream_seed(seed, static_cast<std::uint64_t>(r));
  }

  const double sqrt_gamma = std::sqrt(gamma);
  const int d = system.dim_state;
  const int n = system.dim_noise;

  const double sqrt_dtau = std::sqrt(dtau);
  parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
    Rng rng(ens.replicate_seeds[r]);
    Matrix path(n_steps + 1, d);
    Vector w = w0;
    path.row(0) = w.transpose();
    Vector noise(n);
    for (int k = 0; k < n_steps; ++k) {
      const double tk = t0 + k * dtau;
      Vector f = system.drift_at(tk, w);
      if (improved_drift) {
        f -= 0.5 * gamma * system.jacobian_at(tk, w) * f;
      }
      Vector next = w + f * dtau;
      if (gamma > 0.0) {
        for (int j = 0; j < n; ++j) noise(j) = rng.gaussian();
        next += sqrt_gamma * sqrt_dtau * (system.diffusion_at(tk, w) * noise);
      }
      if (!all_finite(next)) {
        throw DivergenceError("sample_paths: non-finite state in replicate " +
                              std::to_string(r) + " at step " + std::to_string(k + 1));
      }
      path.row(k + 1) = next.transpose();
      w = std::move(next);
    }
    ens.paths[r] = std::move(path);
  });
  return ens;
}

FluctuationStats empirical_fluctuation_stats(const PathEnsemble& ensemble,
                                             const OdeTrajectory& traj, double gamma,
                                             double t) {
  if (ensemble.replicates < 2) {
    throw ValidationError("empirical_fluctuation_stats: need at least two replicates");
  }
  if (std::abs(ensemble.t0 - traj.t0) > 1e-12) {
    throw ValidationError("empirical_fluctuation_stats: ensemble and trajectory t0 differ");
  }
  const int k_ens = ensemble.index_of(t);
  const Vector ode_state = traj.states[static_cast<std::size_t>(traj.index_of(t, false))];
  const int d = static_cast<int>(ode_state.size());
  const int nrep = ensemble.replicates;
  const double scale = gamma > 0.0 ? 1.0 / std::sqrt(gamma) : 0.0;

  Matrix devs(nrep, d);
  for (int r = 0; r < nrep; ++r) {
    devs.row(r) = scale * (ensemble.paths[r].row(k_ens) - ode_state.transpose());
  }

  FluctuationStats stats;
  stats.replicates = nrep;
  stats.mean_dev = devs.colwise().mean();
  Matrix centered = devs.rowwise() - stats.mean_dev.transpose();
  stats.sample_cov = centered.transpose() * centered / (nrep - 1);
  stats.mean_se = (stats.sample_cov.diagonal() / nrep).cwiseSqrt();
  stats.cov_se.resize(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const double cii = stats.sample_cov(i, i);
      const double cjj = stats.sample_cov(j, j);
      const double cij = stats.sample_cov(i, j);
      stats.cov_se(i, j) = std::sqrt((cii * cjj + cij * cij) / (nrep - 1));
    }
  }
  return stats;
}

MeanVariance linear_sde_exact(const LinearSde1d& sde, double t) {
  if (t < sde.t0) throw ValidationError("linear_sde_exact: t must be >= t0");
  MeanVariance mv;
  if (t == sde.t0) {
    mv.mean = sde.w0;
    mv.variance = 0.0;
    return mv;
  }
  const auto integral_h = [&](double from, double to) {
    return adaptive_simpson(sde.h, from, to, 1e-12);
  };
  mv.mean = sde.y + (sde.w0 - sde.y) * std::exp(-integral_h(sde.t0, t));
  const auto integrand = [&](double u) {
    const double s = sde.sigma(u);
    return s * s * std::exp(-2.0 * integral_h(u, t));
  };
  mv.variance = sde.gamma * adaptive_simpson(integrand, sde.t0, t, 1e-10);
  return mv;
}

SdeSystem linear_sde_system(const LinearSde1d& sde) {
  SdeSystem system;
  system.dim_state = 1;
  system.dim_noise = 1;
  const auto h = sde.h;
  const auto sigma = sde.sigma;
  const double y = sde.y;
  system.drift = [h, y](double tau, const Vector& w) {
    Vector f(1);
    f(0) = h(tau) * (y - w(0));
    return f;
  };
  system.diffusion = [sigma](double tau, const Vector&) {
    Matrix g(1, 1);
    g(0, 0) = sigma(tau);
    return g;
  };
  system.jacobian = [h](double tau, const Vector&) {
    Matrix j(1, 1);
    j(0, 0) = -h(tau);
    return j;
  };
  system.conservative = true;
  return system;
}

}  // namespace sgflow::sde
