// Deterministic random number generation.
//
// All stochastic code in the library draws from Rng, a mt19937_64 wrapped
// with explicit Gaussian/gamma samplers so that streams are bit-identical
// across platforms (std::normal_distribution is implementation-defined).
// Parallel work derives one independent stream per task index from a master
// seed via splitmix64, which makes every result independent of the thread
// schedule.
#pragma once

#include <cstdint>
#include <random>

namespace sgflow {

/// splitmix64 step; used both as a mixer and as a stream-seed derivation.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for sub-stream `index` of a master seed. Distinct indices give
/// decorrelated mt19937_64 seeds; the map is pure.
std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform();

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal via Box-Muller (pair cached).
  double gaussian();

  /// Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
  double gamma(double shape);

  /// chi distribution with k degrees of freedom: sqrt(Gamma(k/2, 2)).
  double chi(double k);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sgflow
