#pragma once

#include <cstdint>
#include <random>

namespace chordalcov {

// Deterministic random source. The engine is the standard-specified
// mersenne twister (bit-identical across platforms); the normal and gamma
// transforms are implemented here because the std::distributions are not
// portable. Streams are derived from a master seed with splitmix64, so
// replication i gets an independent, reproducible stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream);

  // Uniform on [2^-64, 1] (never exactly zero, safe under log).
  double uniform();
  double normal();
  // Unit-scale gamma variate, shape > 0 (Marsaglia-Tsang).
  double gamma(double shape);
  double chi_squared(double dof) { return 2.0 * gamma(dof / 2.0); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace chordalcov
