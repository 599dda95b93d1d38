#include "sgflow/mp.hpp"

#include <cmath>

#include "sgflow/quadrature.hpp"

namespace sgflow::mp {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double MpMeasure::lower() const {
  const double s = 1.0 - std::sqrt(alpha);
  return s * s;
}

double MpMeasure::upper() const {
  const double s = 1.0 + std::sqrt(alpha);
  return s * s;
}

double MpMeasure::atom_mass() const { return std::max(0.0, 1.0 - 1.0 / alpha); }

double MpMeasure::ac_mass() const { return std::min(1.0, 1.0 / alpha); }

double mp_density(double alpha, double sigma) {
  if (!(alpha > 0.0)) throw ValidationError("mp_density: alpha must be positive");
  const MpMeasure m{alpha};
  if (sigma <= m.lower() || sigma >= m.upper()) return 0.0;
  return std::sqrt((m.upper() - sigma) * (sigma - m.lower())) /
         (2.0 * kPi * alpha * sigma);
}

MpNodes mp_nodes(double alpha, int n_nodes) {
  if (!(alpha > 0.0)) throw ValidationError("mp_nodes: alpha must be positive");
  if (n_nodes < 16) throw ValidationError("mp_nodes: need at least 16 nodes");
  const MpMeasure m{alpha};
  const double lo = m.lower();
  const double span = m.upper() - lo;
  // sigma = lo + span (1 + cos(theta)) / 2 turns the square-root edges into
  // sin^2(theta), leaving a smooth integrand on [0, pi]:
  //   integral phi drho = (2/pi) int_0^pi phi(sigma(theta)) sin^2(theta)/sigma dtheta
  // (the constant collapses because upper - lower = 4 sqrt(alpha)).
  const QuadRule& rule = gauss_legendre(n_nodes);
  MpNodes nodes;
  nodes.sigma.resize(n_nodes);
  nodes.weight.resize(n_nodes);
  for (int k = 0; k < n_nodes; ++k) {
    const double theta = 0.5 * kPi * (1.0 + rule.nodes[k]);
    const double gl_weight = 0.5 * kPi * rule.weights[k];
    const double sigma = lo + 0.5 * span * (1.0 + std::cos(theta));
    const double sin_theta = std::sin(theta);
    const double jacobian = 0.5 * span * sin_theta;
    nodes.sigma[k] = sigma;
    nodes.weight[k] = gl_weight * jacobian * 0.5 * span * sin_theta /
                      (2.0 * kPi * alpha * sigma);
  }
  return nodes;
}

double mp_integral(double alpha, const std::function<double(double)>& phi,
                   int n_nodes) {
  const MpNodes nodes = mp_nodes(alpha, n_nodes);
  double sum = 0.0;
  for (std::size_t k = 0; k < nodes.sigma.size(); ++k) {
    const double value = phi(nodes.sigma[k]);
    if (!std::isfinite(value)) {
      throw ValidationError("mp_integral: integrand non-finite on the support");
    }
    sum += nodes.weight[k] * value;
  }
  return sum;
}

ConvergedValue mp_integral_auto(double alpha, const std::function<double(double)>& phi,
                                double tol, int start_nodes, int max_nodes) {
  ConvergedValue out;
  double prev = mp_integral(alpha, phi, start_nodes);
  for (int n = 2 * start_nodes; n <= max_nodes; n *= 2) {
    const double next = mp_integral(alpha, phi, n);
    if (std::abs(next - prev) <= tol * std::max(1.0, std::abs(next))) {
      out.value = next;
      out.converged = true;
      return out;
    }
    prev = next;
  }
  out.value = prev;
  out.converged = false;
  return out;
}

double kernel_K(double t, double sigma1, double sigma2) {
  if (t < 0.0) throw ValidationError("kernel_K: t must be >= 0");
  const double delta = sigma2 - sigma1;
  const double near_scale = 1e-7 * std::max({sigma1, sigma2, 1.0});
  if (std::abs(delta) <= near_scale) {
    const double dt = delta * t;
    return t * std::exp(-(sigma1 + sigma2) * t) * (1.0 + dt * dt / 6.0);
  }
  if (std::abs(delta) * t > 30.0) {
    // Far from the diagonal there is no cancellation, and the sinh form
    // would overflow long before the value does.
    return (std::exp(-2.0 * sigma1 * t) - std::exp(-2.0 * sigma2 * t)) /
           (2.0 * delta);
  }
  return std::exp(-(sigma1 + sigma2) * t) * std::sinh(delta * t) / delta;
}

namespace {

double tensor_kernel_sum(double alpha, double t, int n_nodes,
                         const std::function<double(double, double)>& factor) {
  const MpNodes nodes = mp_nodes(alpha, n_nodes);
  const int n = static_cast<int>(nodes.sigma.size());
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      sum += nodes.weight[i] * nodes.weight[j] *
             factor(nodes.sigma[i], nodes.sigma[j]) *
             kernel_K(t, nodes.sigma[i], nodes.sigma[j]);
    }
  }
  return sum;
}

}  // namespace

double f1(double alpha, double t, int n_nodes) {
  return tensor_kernel_sum(alpha, t, n_nodes,
                           [](double s1, double s2) { return s1 * s2; });
}

double f2(double alpha, double t, int n_nodes) {
  return tensor_kernel_sum(alpha, t, n_nodes,
                           [](double s1, double s2) { return 0.5 * (s1 + s2); });
}

void AsymptoticParams::validate() const {
  if (!(alpha > 0.0)) throw ValidationError("asymptotic: alpha must be positive");
  if (!(psi > 0.0)) throw ValidationError("asymptotic: psi must be positive");
  if (alpha > psi) throw ValidationError("asymptotic: alpha must not exceed psi");
  if (mu < 0.0) throw ValidationError("asymptotic: mu must be >= 0");
  if (gamma_prime < 0.0) throw ValidationError("asymptotic: gamma_prime must be >= 0");
  if (!(norm_beta_sq >= 0.0) || !(delta_sq >= 0.0)) {
    throw ValidationError("asymptotic: norm conventions must be >= 0");
  }
}

namespace {

double tail_coefficient(const AsymptoticParams& p) {
  return (1.0 - p.alpha / p.psi) * p.norm_beta_sq + p.mu * p.mu;
}

}  // namespace

double gf_risk_asymptotic(const AsymptoticParams& params, double t, int n_nodes) {
  params.validate();
  if (t < 0.0) throw ValidationError("gf_risk_asymptotic: t must be >= 0");
  const double alpha = params.alpha;
  const double decay = mp_integral(
      alpha, [t](double s) { return std::exp(-2.0 * s * t); }, n_nodes);
  const double relax = mp_integral(
      alpha,
      [t](double s) {
        const double one_minus = -std::expm1(-s * t);
        return one_minus * one_minus / s;
      },
      n_nodes);
  const double head =
      params.delta_sq / params.psi * (std::max(0.0, alpha - 1.0) + alpha * decay);
  return 0.5 * (head + tail_coefficient(params) * (1.0 + alpha * relax));
}

double sgf_correction_asymptotic(const AsymptoticParams& params, double t,
                                 int n_nodes) {
  params.validate();
  if (t < 0.0) throw ValidationError("sgf_correction_asymptotic: t must be >= 0");
  if (params.gamma_prime == 0.0 || t == 0.0) return 0.0;
  const double alpha = params.alpha;
  const double ratio = alpha / params.psi;
  const double gap = mp_integral(
      alpha, [t](double s) { return 0.5 * (-std::expm1(-2.0 * s * t)); }, n_nodes);
  const double inner = ratio * params.delta_sq * f1(alpha, t, n_nodes) +
                       tail_coefficient(params) *
                           (alpha * f2(alpha, t, n_nodes) +
                            std::max(0.0, 1.0 - alpha) * gap);
  return 0.5 * params.gamma_prime * ratio * inner;
}

double gf_risk_limit(const AsymptoticParams& params) {
  params.validate();
  if (params.alpha == 1.0) {
    throw ThresholdError("gf_risk_limit: diverges at the interpolation threshold");
  }
  const double head = params.delta_sq / params.psi * std::max(0.0, params.alpha - 1.0);
  const double denom = 1.0 - std::min(params.alpha, 1.0 / params.alpha);
  return 0.5 * (head + tail_coefficient(params) / denom);
}

double sgf_correction_limit(const AsymptoticParams& params) {
  params.validate();
  return 0.25 * params.gamma_prime * (params.alpha / params.psi) *
         tail_coefficient(params) * std::max(0.0, 1.0 - params.alpha);
}

}  // namespace sgflow::mp
