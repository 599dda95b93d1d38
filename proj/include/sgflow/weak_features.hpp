// Random-subset linear regression ("weak features"): data generation, the
// closed-form gradient-flow trajectory, the SGD noise covariance, expected
// finite-size risks and train error, and discrete SGD/GD simulation.
//
// Model: rows of X are i.i.d. standard normal in R^d, labels
// y = X beta + mu eps, and only a uniformly random subset A of p of the d
// coordinates is trained; the rest stay at zero.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgflow/sde.hpp"
#include "sgflow/types.hpp"

namespace sgflow::weakfeat {

struct ModelParams {
  int n = 0;  // samples
  int d = 0;  // ambient dimension
  int p = 0;  // trained coordinates, p <= d
  double mu = 0.5;
  double gamma = 1e-3;  // >= 0; simulation routines require > 0
  double norm_beta = 1.0;
  int batch_size = 1;  // SGD minibatch size
  // When absent, beta and beta0 are drawn uniformly on the sphere of radius
  // norm_beta (resp. the unit sphere) per instance.
  std::optional<Vector> beta;
  std::optional<Vector> beta0;
  // |beta - beta0|^2 used by the expected-risk formulas when no draw exists.
  // The high-dimensional sphere value is 2; experiments override it with the
  // measured value of their draw.
  double delta_sq = 2.0;

  void validate() const;
  double norm_beta_sq() const { return norm_beta * norm_beta; }
  /// |beta - beta0|^2 fed to the trace formulas: exact when vectors are
  /// supplied, delta_sq otherwise.
  double formula_delta_sq() const;
};

struct WeakFeaturesInstance {
  Matrix X;            // n x d
  Vector y;            // n
  Vector eps;          // n noise draws
  Vector beta;         // d ground truth
  Vector beta0;        // d initialization
  std::vector<int> A;  // sorted trained coordinates, size p
  double mu = 0.0;

  // cached pieces of X_A = U_r diag(sv) V_r^T with r = min(n, p)
  Matrix XA;   // n x p
  Matrix Ur;   // n x r
  Vector sv;   // r singular values, nonincreasing
  Matrix Vr;   // p x r

  int n() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }
  int p() const { return static_cast<int>(A.size()); }
  int r() const { return static_cast<int>(sv.size()); }
  Vector subvector(const Vector& v_full) const;      // v restricted to A
  double complement_sq_norm(const Vector& v) const;  // |v_{A^c}|^2
};

/// Draws X, eps, A, beta, beta0 from the stream of `seed`, assembles y and
/// caches the SVD of X_A.
WeakFeaturesInstance generate_instance(const ModelParams& params, std::uint64_t seed);

/// Gradient-flow estimator at time t >= 0, evaluated in the SVD basis:
/// spectral components relax toward the least-squares solution at rates
/// sv_i^2 / n while null-space components of beta0_A stay fixed.
Vector gf_estimator(const WeakFeaturesInstance& inst, const Vector& beta0_A, double t);

/// SGD noise covariance approximation (2/n) * loss * X_A^T X_A, i.e.
/// |y - X_A bhat|^2 / n^2 * X_A^T X_A.
Matrix diffusion_matrix(const WeakFeaturesInstance& inst, const Vector& bhat_A);

/// Exact single-sample noise covariance, enumerated over all n per-sample
/// gradients. Test oracle for diffusion_matrix.
Matrix diffusion_matrix_enumerated(const WeakFeaturesInstance& inst,
                                   const Vector& bhat_A);

/// Exact population test risk (|beta_A - bhat_A|^2 + |beta_{A^c}|^2 + mu^2)/2.
double risk_given_estimator(const Vector& beta, const std::vector<int>& A,
                            const Vector& bhat_A, double mu);

/// Per-instance train error |y - X_A bhat_A(t)|^2 / (2n) along the GF path.
double train_error_at(const WeakFeaturesInstance& inst, const Vector& beta0_A,
                      double t);

/// Trace of the fluctuation covariance for this instance:
///   (1/n^2) int_0^t |y - X_A bhat^GF(tau)|^2 Tr{L^2 exp(-2 L^2 (t-tau)/n)} dtau
/// with L = diag(sv), by composite Gauss-Legendre with quad_panels panels.
double instance_covariance_trace(const WeakFeaturesInstance& inst,
                                 const Vector& beta0_A, double t,
                                 int quad_panels = 64);

/// The per-instance SGF system (trained coordinates only): drift
/// X_A^T (y - X_A b)/n, diffusion |y - X_A b| X_A^T / n, analytic Jacobian
/// -X_A^T X_A / n. Feeds the general engine as an independent route to the
/// same covariance.
sde::SdeSystem sgf_system(const WeakFeaturesInstance& inst);

struct MonteCarloValue {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Singular-value sets of fresh n x p standard normal draws, one per
/// replicate, each from the stream (seed, replicate). Above
/// `dense_threshold` for r = min(n, p) the spectrum is drawn from the
/// equivalent bidiagonal Wishart model instead of a dense SVD; the two
/// routes sample the same law.
std::vector<Vector> sample_singular_values(int n, int p, int replicates,
                                           std::uint64_t seed,
                                           int dense_threshold = 256,
                                           int threads = 0);

/// Expected GF test risk at time t, Monte Carlo over R singular-value sets:
/// (1/2) { delta_sq [max(0,p-n) + E Tr e^{-2 L^2 t/n}]/d
///         + ((1-p/d)|beta|^2 + mu^2) [1 + E Tr L^{-2}(I - e^{-L^2 t/n})^2] }.
MonteCarloValue expected_gf_risk_finite(const ModelParams& params, double t,
                                        int replicates, std::uint64_t seed);

/// Expected SGD-noise correction to the test risk at time t,
/// (gamma/2) E Tr C_z(t), assembled from per-replicate tau-integrals of
/// trace products plus the below-threshold constant term.
MonteCarloValue expected_sgf_correction_finite(const ModelParams& params, double t,
                                               int replicates, int quad_panels,
                                               std::uint64_t seed);

/// Expected train error at time t:
/// (1/2) { (delta_sq/d) (1/n) E Tr L^2 e^{-2 L^2 t/n}
///         + ((1-p/d)|beta|^2 + mu^2) [(1/n) E Tr e^{-2 L^2 t/n} + max(0,1-p/n)] }.
MonteCarloValue expected_train_error_finite(const ModelParams& params, double t,
                                            int replicates, std::uint64_t seed);

// Batched variants sharing one set of singular-value draws across a time grid.
std::vector<MonteCarloValue> expected_gf_risk_finite_grid(const ModelParams& params,
                                                          const std::vector<double>& ts,
                                                          int replicates,
                                                          std::uint64_t seed,
                                                          int threads = 0);
std::vector<MonteCarloValue> expected_sgf_correction_finite_grid(
    const ModelParams& params, const std::vector<double>& ts, int replicates,
    int quad_panels, std::uint64_t seed, int threads = 0);
std::vector<MonteCarloValue> expected_train_error_finite_grid(
    const ModelParams& params, const std::vector<double>& ts, int replicates,
    std::uint64_t seed, int threads = 0);

enum class DescentMode { kSgd, kGd };

struct RiskRecord {
  long iteration = 0;
  double t = 0.0;  // iteration * gamma
  double risk = 0.0;
};

/// Discrete gradient descent / single-batch SGD on the trained coordinates,
/// recording the exact population risk every record_every iterations
/// (iteration 0 included). Throws DivergenceError when an iterate leaves the
/// finite range, suggesting the stability bound on gamma.
std::vector<RiskRecord> sgd_run(const WeakFeaturesInstance& inst, const Vector& beta0_A,
                                double gamma, long iters, DescentMode mode,
                                long record_every, std::uint64_t seed,
                                int batch_size = 1);

/// Risks of one descent run sampled at ascending iteration marks.
std::vector<double> risks_at_iterations(const WeakFeaturesInstance& inst,
                                        const Vector& beta0_A, double gamma,
                                        DescentMode mode,
                                        const std::vector<long>& marks,
                                        std::uint64_t seed);

struct PairedDifferenceCurve {
  std::vector<double> times;      // requested times, snapped to iteration grid
  std::vector<long> iterations;   // matching iteration counts
  std::vector<double> mean_diff;  // mean over subsets of risk_sgd - risk_gd
  std::vector<double> stderr_;    // paired standard error
  double measured_delta_sq = 0.0;      // |beta - beta0|^2 of the draw
  double measured_norm_beta_sq = 0.0;  // |beta|^2 of the draw
  int subsets = 0;
};

/// Paired SGD-minus-GD expectation over fresh subset instances. beta and
/// beta0 are drawn once from the master seed (or taken from params); each
/// subset gets a fresh instance and paired runs from the same beta0.
/// sgd_runs_per_subset > 1 averages several SGD streams per instance.
PairedDifferenceCurve sgd_minus_gd_expectation(const ModelParams& params,
                                               const std::vector<double>& t_grid,
                                               int subsets, int sgd_runs_per_subset,
                                               std::uint64_t seed, int threads = 0);

enum class CurveProvenance { kFiniteSizeMc, kAsymptotic, kSimulation };

struct RiskCurvePoint {
  double t = 0.0;
  double gf_risk = 0.0;
  double sgf_correction = 0.0;
  double sgf_risk = 0.0;  // always gf_risk + sgf_correction
  double gf_stderr = 0.0;
  double correction_stderr = 0.0;
  std::optional<double> train_error;
};

struct RiskCurve {
  std::vector<RiskCurvePoint> points;
  CurveProvenance provenance = CurveProvenance::kAsymptotic;
  int replicates = 0;
  std::uint64_t seed = 0;

  /// Appends a point with sgf_risk = gf_risk + sgf_correction by construction.
  void add(double t, double gf, double correction, double gf_se = 0.0,
           double corr_se = 0.0, std::optional<double> train = std::nullopt);
};

}  // namespace sgflow::weakfeat
