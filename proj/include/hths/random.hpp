#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace hths {

// Seeded random stream. Variates are built from the raw 64-bit output of
// std::mt19937_64 (whose sequence is fixed by the standard) rather than the
// implementation-defined std:: distributions. One stream per chain.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform();

  double normal();

  double exponential() { return -std::log(uniform()); }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Counter-based child seed: the same (master, stream) pair always yields the
// same seed and distinct streams are decorrelated by splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Gamma(shape, rate) variate with mean shape / rate. Shapes below one use
// Gamma(shape + 1) * U^(1/shape).
double sample_gamma(double shape, double rate, RandomStream& rng);

// log of a Gamma(shape, rate) variate, computed without forming the variate
// so tiny shapes do not underflow.
double sample_log_gamma(double shape, double rate, RandomStream& rng);

}  // namespace hths
