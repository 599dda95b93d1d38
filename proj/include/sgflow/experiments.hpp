// Reproduction harness: phase sweeps over the aspect ratio, time sweeps,
// the (t, alpha) correction heatmap, GF risk/train-error curves, and the
// SDE-engine validation scenarios. Every run emits a table plus a JSON
// metadata block echoing its fully resolved configuration and seed.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgflow/mp.hpp"
#include "sgflow/result_io.hpp"
#include "sgflow/weak_features.hpp"

namespace sgflow::experiments {

enum class Kind { kPhaseSweep, kTimeSweep, kHeatmap, kGfCurves, kSdeValidation };

std::string kind_name(Kind kind);

struct ExperimentConfig {
  Kind kind = Kind::kTimeSweep;
  mp::AsymptoticParams asym;  // psi, mu, gamma_prime, norm conventions
  int d = 200;                // simulation scale; n = round(d / psi)
  std::vector<double> alpha_grid = {0.5};
  std::vector<double> t_grid = {1.0};
  int subsets = 300;
  int sgd_runs = 1;          // SGD streams averaged per subset
  int replicates = 100;      // finite-size formula replicates
  int quad_panels = 64;      // tau-quadrature panels
  int mp_nodes = 400;        // MP quadrature nodes
  double t_infinity = 50.0;  // operational infinite time for phase sweeps
  int sde_steps = 2000;      // grid steps for the SDE validation engine
  int mc_paths = 4000;       // Euler-Maruyama replicates for validation
  std::uint64_t seed = 12345;
  int threads = 0;  // 0 = auto
  std::string scenario = "constant";
  std::string name;  // output base name; defaults to the kind

  void validate() const;
  int samples() const;                    // n
  int features_for(double alpha) const;   // p at a grid point
  double gamma() const { return asym.gamma_prime / d; }
  nlohmann::json echo() const;
  std::string output_name() const;
};

struct ExperimentResult {
  std::string name;
  io::Table table;
  nlohmann::json metadata;
};

/// Per alpha: the infinite-time correction against paired SGD-GD simulation
/// at t = t_infinity.
ExperimentResult run_phase_sweep(const ExperimentConfig& cfg);

/// Per t at fixed alpha: asymptotic correction, finite-size correction, and
/// the paired simulation, aligned on t = iteration * gamma. Rows inside
/// 1 <= t <= 10 carry an informational intermediate-regime flag.
ExperimentResult run_time_sweep(const ExperimentConfig& cfg);

/// Long-form (t, alpha, correction) matrix of the asymptotic theory.
ExperimentResult run_heatmap(const ExperimentConfig& cfg);

/// GF test risk theory with GD simulation points and finite-size train error.
ExperimentResult run_gf_curves(const ExperimentConfig& cfg);

/// Exact law vs engine vs Euler-Maruyama table for a named scenario:
/// "constant", "pinning", "timevar", or "weakfeatures".
ExperimentResult run_sde_validation(const ExperimentConfig& cfg);

ExperimentResult run(const ExperimentConfig& cfg);

/// Writes <name>.csv and <name>.meta.json; metadata gains the wall time.
io::ResultFiles write_result(const ExperimentResult& result, const std::string& dir);

std::vector<double> linear_grid(double lo, double hi, int points);
std::vector<double> log_grid(double lo, double hi, int points);

}  // namespace sgflow::experiments
