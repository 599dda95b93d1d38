// Gauss-Legendre rules and adaptive quadrature.
#pragma once

#include <functional>
#include <vector>

namespace sgflow {

struct QuadRule {
  std::vector<double> nodes;    // in (-1, 1), ascending
  std::vector<double> weights;  // sum to 2
};

/// n-point Gauss-Legendre rule on [-1, 1] (Golub-Welsch). Cached per n.
const QuadRule& gauss_legendre(int n);

/// Fixed-order Gauss-Legendre on [a, b].
double gl_integrate(const std::function<double(double)>& f, double a, double b, int n);

/// Composite rule: `panels` equal panels over [a, b], `order`-point GL on each.
double composite_gl(const std::function<double(double)>& f, double a, double b,
                    int panels, int order = 8);

/// Adaptive Simpson to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10);

}  // namespace sgflow
