// Shared aliases and error types.
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace sgflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Bad arguments, malformed configs, violated preconditions. CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical iteration produced non-finite values. CLI exit code 2.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// A quantity is undefined at the requested parameter point.
class ThresholdError : public std::runtime_error {
 public:
  explicit ThresholdError(const std::string& what) : std::runtime_error(what) {}
};

/// A covariance collapsed to rank zero where a density was requested.
class DegenerateDensityError : public std::runtime_error {
 public:
  explicit DegenerateDensityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sgflow
