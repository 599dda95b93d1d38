// Marchenko-Pastur quadrature and the large-system closed forms: asymptotic
// GF test risk, the SGD-noise correction kernels, and their infinite-time
// limits.
//
// rho_alpha is the absolutely continuous part of the Marchenko-Pastur law,
// the limiting spectrum of (1/n) X_A^T X_A at aspect ratio alpha = p/n,
// supported on [(1-sqrt(alpha))^2, (1+sqrt(alpha))^2] with total mass
// min(1, 1/alpha);
// for alpha > 1 the remaining mass 1 - 1/alpha sits in an atom at zero which
// every integral here treats separately.
#pragma once

#include <functional>
#include <vector>

#include "sgflow/types.hpp"

namespace sgflow::mp {

struct MpMeasure {
  double alpha = 0.0;
  double lower() const;      // (1 - sqrt(alpha))^2
  double upper() const;      // (1 + sqrt(alpha))^2
  double atom_mass() const;  // max(0, 1 - 1/alpha)
  double ac_mass() const;    // min(1, 1/alpha)
};

/// Density of rho_alpha at sigma; zero off the support.
double mp_density(double alpha, double sigma);

/// Nodes and weights such that integral phi drho_alpha = sum w_i phi(sigma_i).
/// The square-root edge factors are absorbed by the substitution
/// sigma = lower + (upper - lower)(1 + cos(theta))/2 before Gauss-Legendre.
struct MpNodes {
  std::vector<double> sigma;
  std::vector<double> weight;
};
MpNodes mp_nodes(double alpha, int n_nodes);

/// integral phi drho_alpha with a fixed node count (default 400).
double mp_integral(double alpha, const std::function<double(double)>& phi,
                   int n_nodes = 400);

struct ConvergedValue {
  double value = 0.0;
  bool converged = false;
};

/// Node-doubling wrapper: starts at start_nodes and doubles until successive
/// values differ by less than tol (relative for values above 1), up to
/// max_nodes.
ConvergedValue mp_integral_auto(double alpha, const std::function<double(double)>& phi,
                                double tol = 1e-9, int start_nodes = 400,
                                int max_nodes = 6400);

/// Relaxation kernel K(t, s1, s2) = (e^{-2 s1 t} - e^{-2 s2 t}) / (2(s2 - s1)),
/// evaluated in the cancellation-free midpoint form with a series branch near
/// the diagonal; exactly symmetric in (s1, s2), K(t, s, s) = t e^{-2 s t}.
double kernel_K(double t, double sigma1, double sigma2);

/// Double MP integrals of s1 s2 K and (s1 + s2) K / 2 (tensor-product rule).
double f1(double alpha, double t, int n_nodes = 400);
double f2(double alpha, double t, int n_nodes = 400);

struct AsymptoticParams {
  double alpha = 0.5;       // p/n limit
  double psi = 2.5;         // d/n limit
  double mu = 0.5;          // label noise strength
  double gamma_prime = 1.0; // rescaled learning rate, gamma = gamma'/d
  double norm_beta_sq = 1.0;
  double delta_sq = 2.0;    // |beta - beta0|^2 convention

  void validate() const;
};

/// Asymptotic GF test risk at time t.
double gf_risk_asymptotic(const AsymptoticParams& params, double t, int n_nodes = 400);

/// Asymptotic SGD-noise correction to the test risk at time t (the SGF-GF
/// difference); nonnegative.
double sgf_correction_asymptotic(const AsymptoticParams& params, double t,
                                 int n_nodes = 400);

/// Infinite-time GF risk. Diverges at the interpolation threshold alpha = 1
/// (ThresholdError).
double gf_risk_limit(const AsymptoticParams& params);

/// Infinite-time SGD-noise correction
///   (gamma'/4)(alpha/psi)((1 - alpha/psi)|beta|^2 + mu^2) max(0, 1 - alpha);
/// zero for alpha >= 1.
double sgf_correction_limit(const AsymptoticParams& params);

}  // namespace sgflow::mp
