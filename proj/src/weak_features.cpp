#include "sgflow/weak_features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgflow/parallel.hpp"
#include "sgflow/quadrature.hpp"
#include "sgflow/rng.hpp"

namespace sgflow::weakfeat {

void ModelParams::validate() const {
  if (n < 1) throw ValidationError("model: n must be >= 1");
  if (p < 1 || p > d) throw ValidationError("model: need 1 <= p <= d");
  if (mu < 0.0) throw ValidationError("model: mu must be >= 0");
  if (gamma < 0.0) throw ValidationError("model: gamma must be >= 0");
  if (batch_size < 1) throw ValidationError("model: batch_size must be >= 1");
  if (beta && beta->size() != d) throw ValidationError("model: beta has wrong dimension");
  if (beta0 && beta0->size() != d) throw ValidationError("model: beta0 has wrong dimension");
}

double ModelParams::formula_delta_sq() const {
  if (beta && beta0) return (*beta - *beta0).squaredNorm();
  return delta_sq;
}

Vector WeakFeaturesInstance::subvector(const Vector& v_full) const {
  Vector sub(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) sub(i) = v_full(A[i]);
  return sub;
}

double WeakFeaturesInstance::complement_sq_norm(const Vector& v) const {
  double in_a = 0.0;
  for (int idx : A) in_a += v(idx) * v(idx);
  return v.squaredNorm() - in_a;
}

namespace {

Vector draw_sphere(Rng& rng, int dim, double radius) {
  Vector v(dim);
  double norm_sq = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v(i) = rng.gaussian();
    norm_sq = v.squaredNorm();
  } while (norm_sq == 0.0);
  return v * (radius / std::sqrt(norm_sq));
}

std::vector<int> draw_subset(Rng& rng, int d, int p) {
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < p; ++i) {
    const int j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(d - i)));
    std::swap(idx[i], idx[j]);
  }
  std::vector<int> subset(idx.begin(), idx.begin() + p);
  std::sort(subset.begin(), subset.end());
  return subset;
}

}  // namespace

WeakFeaturesInstance generate_instance(const ModelParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  WeakFeaturesInstance inst;
  inst.mu = params.mu;

  // Fixed draw order: X row-major, eps, A, then beta/beta0 when generated.
  inst.X.resize(params.n, params.d);
  for (int i = 0; i < params.n; ++i) {
    for (int j = 0; j < params.d; ++j) inst.X(i, j) = rng.gaussian();
  }
  inst.eps.resize(params.n);
  for (int i = 0; i < params.n; ++i) inst.eps(i) = rng.gaussian();
  inst.A = draw_subset(rng, params.d, params.p);
  inst.beta = params.beta ? *params.beta : draw_sphere(rng, params.d, params.norm_beta);
  inst.beta0 = params.beta0 ? *params.beta0 : draw_sphere(rng, params.d, 1.0);
  inst.y = inst.X * inst.beta + params.mu * inst.eps;

  inst.XA.resize(params.n, params.p);
  for (int j = 0; j < params.p; ++j) inst.XA.col(j) = inst.X.col(inst.A[j]);
  Eigen::BDCSVD<Matrix> svd(inst.XA, Eigen::ComputeThinU | Eigen::ComputeThinV);
  inst.Ur = svd.matrixU();
  inst.sv = svd.singularValues();
  inst.Vr = svd.matrixV();
  return inst;
}

Vector gf_estimator(const WeakFeaturesInstance& inst, const Vector& beta0_A, double t) {
  if (t < 0.0) throw ValidationError("gf_estimator: t must be >= 0");
  const int n = inst.n();
  const Vector vt = inst.Vr.transpose() * beta0_A;  // spectral coords of beta0_A
  const Vector c = inst.Ur.transpose() * inst.y;
  Vector shift(inst.r());
  for (int i = 0; i < inst.r(); ++i) {
    const double lam = inst.sv(i);
    const double decay_minus_one = std::expm1(-lam * lam * t / n);
    shift(i) = decay_minus_one * (vt(i) - c(i) / lam);
  }
  // Spectral components relax toward c_i / lam_i; null-space components of
  // beta0_A are untouched by the flow. Exact at t = 0 by construction.
  return beta0_A + inst.Vr * shift;
}

Matrix diffusion_matrix(const WeakFeaturesInstance& inst, const Vector& bhat_A) {
  const int n = inst.n();
  const double resid_sq = (inst.y - inst.XA * bhat_A).squaredNorm();
  return (resid_sq / static_cast<double>(n) / static_cast<double>(n)) *
         (inst.XA.transpose() * inst.XA);
}

Matrix diffusion_matrix_enumerated(const WeakFeaturesInstance& inst,
                                   const Vector& bhat_A) {
  const int n = inst.n();
  const int p = inst.p();
  const Vector resid = inst.y - inst.XA * bhat_A;
  const Vector mean_grad = inst.XA.transpose() * resid / n;
  Matrix sigma = Matrix::Zero(p, p);
  for (int k = 0; k < n; ++k) {
    const Vector xi = resid(k) * inst.XA.row(k).transpose() - mean_grad;
    sigma += xi * xi.transpose();
  }
  return sigma / n;
}

double risk_given_estimator(const Vector& beta, const std::vector<int>& A,
                            const Vector& bhat_A, double mu) {
  double learned_sq = 0.0;
  double in_a_sq = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) {
    const double diff = beta(A[i]) - bhat_A(i);
    learned_sq += diff * diff;
    in_a_sq += beta(A[i]) * beta(A[i]);
  }
  const double comp_sq = beta.squaredNorm() - in_a_sq;
  return 0.5 * (learned_sq + comp_sq + mu * mu);
}

namespace {

// Residual decomposition along the GF path: |y - X_A bhat(tau)|^2 =
// sum_i exp(-2 sv_i^2 tau / n) a_i^2 + const, with a_i = c_i - sv_i vt_i.
struct ResidualProfile {
  Eigen::ArrayXd rate;    // sv^2 / n
  Eigen::ArrayXd amp_sq;  // a_i^2
  double floor_sq = 0.0;  // |y|^2 - |c|^2, the off-range part

  double at(double tau) const {
    return (amp_sq * (-2.0 * rate * tau).exp()).sum() + floor_sq;
  }
};

ResidualProfile residual_profile(const WeakFeaturesInstance& inst,
                                 const Vector& beta0_A) {
  ResidualProfile prof;
  const Vector c = inst.Ur.transpose() * inst.y;
  const Vector vt = inst.Vr.transpose() * beta0_A;
  prof.rate = inst.sv.array().square() / inst.n();
  prof.amp_sq = (c.array() - inst.sv.array() * vt.array()).square();
  prof.floor_sq = std::max(0.0, inst.y.squaredNorm() - c.squaredNorm());
  return prof;
}

}  // namespace

double train_error_at(const WeakFeaturesInstance& inst, const Vector& beta0_A,
                      double t) {
  if (t < 0.0) throw ValidationError("train_error_at: t must be >= 0");
  return residual_profile(inst, beta0_A).at(t) / (2.0 * inst.n());
}

double instance_covariance_trace(const WeakFeaturesInstance& inst,
                                 const Vector& beta0_A, double t, int quad_panels) {
  if (t < 0.0) throw ValidationError("instance_covariance_trace: t must be >= 0");
  if (t == 0.0) return 0.0;
  const ResidualProfile prof = residual_profile(inst, beta0_A);
  const Eigen::ArrayXd lam_sq = inst.sv.array().square();
  const Eigen::ArrayXd rate = prof.rate;
  const auto integrand = [&](double tau) {
    const double damp_trace = (lam_sq * (-2.0 * rate * (t - tau)).exp()).sum();
    return prof.at(tau) * damp_trace;
  };
  const double n = inst.n();
  return composite_gl(integrand, 0.0, t, quad_panels) / (n * n);
}

sde::SdeSystem sgf_system(const WeakFeaturesInstance& inst) {
  sde::SdeSystem system;
  system.dim_state = inst.p();
  system.dim_noise = inst.n();
  const Matrix xa = inst.XA;
  const Vector y = inst.y;
  const double n = inst.n();
  const Matrix hessian = xa.transpose() * xa / n;
  system.drift = [xa, y, n](double, const Vector& b) {
    return Vector(xa.transpose() * (y - xa * b) / n);
  };
  system.diffusion = [xa, y, n](double, const Vector& b) {
    return Matrix((y - xa * b).norm() / n * xa.transpose());
  };
  system.jacobian = [hessian](double, const Vector&) { return Matrix(-hessian); };
  system.conservative = true;
  return system;
}

namespace {

Vector wishart_spectrum_tridiagonal(int n, int p, Rng& rng) {
  // Bidiagonal model of the real Wishart spectrum: B is r x r lower
  // bidiagonal with chi-distributed entries, and B B^T has the eigenvalue
  // law of X^T X for X an m x r standard normal matrix.
  const int r = std::min(n, p);
  const int m = std::max(n, p);
  Vector diag_chi(r), off_chi(std::max(0, r - 1));
  for (int i = 0; i < r; ++i) diag_chi(i) = rng.chi(static_cast<double>(m - i));
  for (int i = 0; i + 1 < r; ++i) off_chi(i) = rng.chi(static_cast<double>(r - 1 - i));

  Vector diag(r), subdiag(std::max(0, r - 1));
  for (int i = 0; i < r; ++i) {
    const double lower = i > 0 ? off_chi(i - 1) : 0.0;
    diag(i) = diag_chi(i) * diag_chi(i) + lower * lower;
  }
  for (int i = 0; i + 1 < r; ++i) subdiag(i) = off_chi(i) * diag_chi(i);

  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.computeFromTridiagonal(diag, subdiag, Eigen::EigenvaluesOnly);
  Vector sv(r);
  for (int i = 0; i < r; ++i) {
    sv(i) = std::sqrt(std::max(0.0, es.eigenvalues()(r - 1 - i)));  // nonincreasing
  }
  return sv;
}

Vector gaussian_singular_values(int n, int p, Rng& rng) {
  Matrix x(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = rng.gaussian();
  }
  Eigen::BDCSVD<Matrix> svd(x);
  return svd.singularValues();
}

}  // namespace

std::vector<Vector> sample_singular_values(int n, int p, int replicates,
                                           std::uint64_t seed, int dense_threshold,
                                           int threads) {
  if (replicates < 1) throw ValidationError("sample_singular_values: replicates >= 1");
  std::vector<Vector> sets(replicates);
  const bool dense = std::min(n, p) <= dense_threshold;
  parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
    Rng rng(derive_stream_seed(seed, r));
    sets[r] = dense ? gaussian_singular_values(n, p, rng)
                    : wishart_spectrum_tridiagonal(n, p, rng);
  });
  return sets;
}

namespace {

struct MomentScalars {
  double delta_sq = 0.0;
  double tail = 0.0;  // (1 - p/d) |beta|^2 + mu^2
};

MomentScalars moment_scalars(const ModelParams& params) {
  MomentScalars s;
  s.delta_sq = params.formula_delta_sq();
  s.tail = (1.0 - static_cast<double>(params.p) / params.d) * params.norm_beta_sq() +
           params.mu * params.mu;
  return s;
}

MonteCarloValue reduce(const std::vector<double>& values) {
  MonteCarloValue mc;
  const int r = static_cast<int>(values.size());
  mc.value = std::accumulate(values.begin(), values.end(), 0.0) / r;
  if (r > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - mc.value) * (v - mc.value);
    mc.stderr_ = std::sqrt(ss / (r - 1) / r);
  }
  return mc;
}

double gf_risk_for_spectrum(const ModelParams& params, const MomentScalars& s,
                            const Vector& sv, double t) {
  const double n = params.n;
  const Eigen::ArrayXd w = sv.array().square() / n;  // sv^2 / n
  const double tr_decay = (-2.0 * w * t).exp().sum();
  const Eigen::ArrayXd one_minus = 1.0 - (-w * t).exp();
  const double tr_inv = (one_minus.square() / sv.array().square()).sum();
  const double head =
      s.delta_sq * (std::max(0, params.p - params.n) + tr_decay) / params.d;
  return 0.5 * (head + s.tail * (1.0 + tr_inv));
}

double train_error_for_spectrum(const ModelParams& params, const MomentScalars& s,
                                const Vector& sv, double t) {
  const double n = params.n;
  const Eigen::ArrayXd w = sv.array().square() / n;
  const double tr_w_decay = (w * (-2.0 * w * t).exp()).sum();
  const double tr_decay = (-2.0 * w * t).exp().sum();
  const double below = std::max(0.0, 1.0 - static_cast<double>(params.p) / n);
  return 0.5 * (s.delta_sq / params.d * tr_w_decay + s.tail * (tr_decay / n + below));
}

double sgf_correction_for_spectrum(const ModelParams& params, const MomentScalars& s,
                                   const Vector& sv, double t, int quad_panels) {
  if (t <= 0.0) return 0.0;
  const double n = params.n;
  const Eigen::ArrayXd w = sv.array().square() / n;
  const auto weighted_trace = [&](double u) { return (w * (-2.0 * w * u).exp()).sum(); };
  const auto plain_trace = [&](double u) { return (-2.0 * w * u).exp().sum(); };

  const double int_ww = composite_gl(
      [&](double tau) { return weighted_trace(tau) * weighted_trace(t - tau); }, 0.0, t,
      quad_panels);
  const double int_pw = composite_gl(
      [&](double tau) { return plain_trace(tau) * weighted_trace(t - tau); }, 0.0, t,
      quad_panels);
  const double tr_gap = (1.0 - (-2.0 * w * t).exp()).sum();
  const double below = std::max(0.0, 1.0 - static_cast<double>(params.p) / n);
  const double trace_total =
      s.delta_sq / params.d * int_ww + s.tail * (int_pw / n + 0.5 * below * tr_gap);
  return 0.5 * params.gamma * trace_total;
}

template <typename PerSpectrum>
std::vector<MonteCarloValue> monte_carlo_grid(const ModelParams& params,
                                              const std::vector<double>& ts,
                                              int replicates, std::uint64_t seed,
                                              int threads, PerSpectrum eval) {
  params.validate();
  if (replicates < 2) throw ValidationError("expected-value formulas need replicates >= 2");
  const auto sv_sets =
      sample_singular_values(params.n, params.p, replicates, seed, 256, threads);
  const MomentScalars s = moment_scalars(params);
  std::vector<std::vector<double>> values(ts.size(),
                                          std::vector<double>(replicates, 0.0));
  parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
    for (std::size_t j = 0; j < ts.size(); ++j) {
      values[j][r] = eval(params, s, sv_sets[r], ts[j]);
    }
  });
  std::vector<MonteCarloValue> out(ts.size());
  for (std::size_t j = 0; j < ts.size(); ++j) out[j] = reduce(values[j]);
  return out;
}

}  // namespace

std::vector<MonteCarloValue> expected_gf_risk_finite_grid(const ModelParams& params,
                                                          const std::vector<double>& ts,
                                                          int replicates,
                                                          std::uint64_t seed,
                                                          int threads) {
  return monte_carlo_grid(params, ts, replicates, seed, threads,
                          [](const ModelParams& p, const MomentScalars& s,
                             const Vector& sv, double t) {
                            return gf_risk_for_spectrum(p, s, sv, t);
                          });
}

std::vector<MonteCarloValue> expected_train_error_finite_grid(
    const ModelParams& params, const std::vector<double>& ts, int replicates,
    std::uint64_t seed, int threads) {
  return monte_carlo_grid(params, ts, replicates, seed, threads,
                          [](const ModelParams& p, const MomentScalars& s,
                             const Vector& sv, double t) {
                            return train_error_for_spectrum(p, s, sv, t);
                          });
}

std::vector<MonteCarloValue> expected_sgf_correction_finite_grid(
    const ModelParams& params, const std::vector<double>& ts, int replicates,
    int quad_panels, std::uint64_t seed, int threads) {
  return monte_carlo_grid(params, ts, replicates, seed, threads,
                          [quad_panels](const ModelParams& p, const MomentScalars& s,
                                        const Vector& sv, double t) {
                            return sgf_correction_for_spectrum(p, s, sv, t, quad_panels);
                          });
}

MonteCarloValue expected_gf_risk_finite(const ModelParams& params, double t,
                                        int replicates, std::uint64_t seed) {
  return expected_gf_risk_finite_grid(params, {t}, replicates, seed).front();
}

MonteCarloValue expected_sgf_correction_finite(const ModelParams& params, double t,
                                               int replicates, int quad_panels,
                                               std::uint64_t seed) {
  return expected_sgf_correction_finite_grid(params, {t}, replicates, quad_panels, seed)
      .front();
}

MonteCarloValue expected_train_error_finite(const ModelParams& params, double t,
                                            int replicates, std::uint64_t seed) {
  return expected_train_error_finite_grid(params, {t}, replicates, seed).front();
}

namespace {

void check_iterate(const Vector& b, long iteration, double gamma) {
  if (!b.allFinite() || b.norm() > 1e12) {
    throw DivergenceError(
        "sgd_run: iterate diverged at iteration " + std::to_string(iteration) +
        "; gamma = " + std::to_string(gamma) +
        " likely exceeds the stability bound 2n / lambda_max^2");
  }
}

}  // namespace

std::vector<RiskRecord> sgd_run(const WeakFeaturesInstance& inst, const Vector& beta0_A,
                                double gamma, long iters, DescentMode mode,
                                long record_every, std::uint64_t seed, int batch_size) {
  if (iters < 1) throw ValidationError("sgd_run: iters must be >= 1");
  if (!(gamma > 0.0)) throw ValidationError("sgd_run: gamma must be > 0");
  if (record_every < 1) throw ValidationError("sgd_run: record_every must be >= 1");
  if (batch_size < 1) throw ValidationError("sgd_run: batch_size must be >= 1");

  const int n = inst.n();
  Rng rng(seed);
  Vector b = beta0_A;
  std::vector<RiskRecord> records;
  const auto record = [&](long v) {
    records.push_back({v, v * gamma, risk_given_estimator(inst.beta, inst.A, b, inst.mu)});
  };
  record(0);
  for (long v = 1; v <= iters; ++v) {
    if (mode == DescentMode::kGd) {
      b += (gamma / n) * (inst.XA.transpose() * (inst.y - inst.XA * b));
    } else if (batch_size == 1) {
      const int k = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      const double resid = inst.y(k) - inst.XA.row(k).dot(b);
      b += gamma * resid * inst.XA.row(k).transpose();
    } else {
      Vector grad = Vector::Zero(b.size());
      for (int s = 0; s < batch_size; ++s) {
        const int k = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        const double resid = inst.y(k) - inst.XA.row(k).dot(b);
        grad += resid * inst.XA.row(k).transpose();
      }
      b += gamma / batch_size * grad;
    }
    if (v % record_every == 0 || v == iters) {
      check_iterate(b, v, gamma);
      record(v);
    }
  }
  return records;
}

std::vector<double> risks_at_iterations(const WeakFeaturesInstance& inst,
                                        const Vector& beta0_A, double gamma,
                                        DescentMode mode,
                                        const std::vector<long>& marks,
                                        std::uint64_t seed) {
  if (!std::is_sorted(marks.begin(), marks.end())) {
    throw ValidationError("risks_at_iterations: marks must be ascending");
  }
  std::vector<double> out(marks.size(), 0.0);
  Rng rng(seed);
  Vector b = beta0_A;
  long v = 0;
  for (std::size_t j = 0; j < marks.size(); ++j) {
    while (v < marks[j]) {
      if (mode == DescentMode::kGd) {
        b += (gamma / inst.n()) * (inst.XA.transpose() * (inst.y - inst.XA * b));
      } else {
        const int k =
            static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(inst.n())));
        const double resid = inst.y(k) - inst.XA.row(k).dot(b);
        b += gamma * resid * inst.XA.row(k).transpose();
      }
      ++v;
    }
    check_iterate(b, v, gamma);
    out[j] = risk_given_estimator(inst.beta, inst.A, b, inst.mu);
  }
  return out;
}

PairedDifferenceCurve sgd_minus_gd_expectation(const ModelParams& params,
                                               const std::vector<double>& t_grid,
                                               int subsets, int sgd_runs_per_subset,
                                               std::uint64_t seed, int threads) {
  params.validate();
  if (!(params.gamma > 0.0)) {
    throw ValidationError("sgd_minus_gd_expectation: gamma must be > 0");
  }
  if (subsets < 2) throw ValidationError("sgd_minus_gd_expectation: subsets must be >= 2");
  if (sgd_runs_per_subset < 1) {
    throw ValidationError("sgd_minus_gd_expectation: need at least one sgd run");
  }
  if (t_grid.empty()) throw ValidationError("sgd_minus_gd_expectation: empty time grid");
  if (!std::is_sorted(t_grid.begin(), t_grid.end())) {
    throw ValidationError("sgd_minus_gd_expectation: time grid must be ascending");
  }

  // beta and beta0 are drawn once; every subset shares them.
  ModelParams shared = params;
  {
    Rng rng(derive_stream_seed(seed, 0));
    if (!shared.beta) shared.beta = draw_sphere(rng, params.d, params.norm_beta);
    if (!shared.beta0) shared.beta0 = draw_sphere(rng, params.d, 1.0);
  }

  PairedDifferenceCurve curve;
  curve.subsets = subsets;
  curve.measured_delta_sq = (*shared.beta - *shared.beta0).squaredNorm();
  curve.measured_norm_beta_sq = shared.beta->squaredNorm();
  curve.times.resize(t_grid.size());
  curve.iterations.resize(t_grid.size());
  long v_max = 1;
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    const long v = std::max<long>(1, std::lround(t_grid[j] / params.gamma));
    curve.iterations[j] = v;
    curve.times[j] = v * params.gamma;
    v_max = std::max(v_max, v);
  }

  Matrix diffs(subsets, static_cast<int>(t_grid.size()));
  parallel_for(static_cast<std::size_t>(subsets), threads, [&](std::size_t s) {
    const auto inst =
        generate_instance(shared, derive_stream_seed(seed, 2 * s + 1));
    const Vector beta0_A = inst.subvector(inst.beta0);

    const auto gd = risks_at_iterations(inst, beta0_A, params.gamma, DescentMode::kGd,
                                        curve.iterations, 0);
    std::vector<double> sgd(t_grid.size(), 0.0);
    const std::uint64_t sgd_base = derive_stream_seed(seed, 2 * s + 2);
    for (int q = 0; q < sgd_runs_per_subset; ++q) {
      const auto one = risks_at_iterations(
          inst, beta0_A, params.gamma, DescentMode::kSgd, curve.iterations,
          derive_stream_seed(sgd_base, static_cast<std::uint64_t>(q)));
      for (std::size_t j = 0; j < t_grid.size(); ++j) sgd[j] += one[j];
    }
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
      diffs(static_cast<int>(s), static_cast<int>(j)) =
          sgd[j] / sgd_runs_per_subset - gd[j];
    }
  });

  curve.mean_diff.resize(t_grid.size());
  curve.stderr_.resize(t_grid.size());
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    const auto col = diffs.col(static_cast<int>(j));
    const double mean = col.mean();
    const double ss = (col.array() - mean).square().sum();
    curve.mean_diff[j] = mean;
    curve.stderr_[j] = std::sqrt(ss / (subsets - 1) / subsets);
  }
  return curve;
}

void RiskCurve::add(double t, double gf, double correction, double gf_se,
                    double corr_se, std::optional<double> train) {
  RiskCurvePoint pt;
  pt.t = t;
  pt.gf_risk = gf;
  pt.sgf_correction = correction;
  pt.sgf_risk = gf + correction;
  pt.gf_stderr = gf_se;
  pt.correction_stderr = corr_se;
  pt.train_error = train;
  points.push_back(pt);
}

}  // namespace sgflow::weakfeat
