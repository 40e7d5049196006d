#include "hths/random.hpp"

#include <cmath>
#include <string>

#include "hths/error.hpp"

namespace hths {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_gamma_parameters(double shape, double rate) {
  if (!(shape > 0.0) || !std::isfinite(shape) || !(rate > 0.0) || !std::isfinite(rate)) {
    throw DomainError("gamma variate requires positive finite shape and rate (shape=" + std::to_string(shape) +
                      ", rate=" + std::to_string(rate) + ")");
  }
}

// Marsaglia & Tsang (2000) for shape >= 1, unit rate.
double marsaglia_tsang(double shape, RandomStream& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

double RandomStream::uniform() {
  // 53 random mantissa bits, offset by half a step so 0 is never produced.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * factor;
  has_cached_normal_ = true;
  return u * factor;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

double sample_gamma(double shape, double rate, RandomStream& rng) {
  check_gamma_parameters(shape, rate);
  if (shape >= 1.0) return marsaglia_tsang(shape, rng) / rate;
  const double boosted = marsaglia_tsang(shape + 1.0, rng);
  return boosted * std::pow(rng.uniform(), 1.0 / shape) / rate;
}

double sample_log_gamma(double shape, double rate, RandomStream& rng) {
  check_gamma_parameters(shape, rate);
  if (shape >= 1.0) return std::log(marsaglia_tsang(shape, rng)) - std::log(rate);
  const double boosted = marsaglia_tsang(shape + 1.0, rng);
  return std::log(boosted) + std::log(rng.uniform()) / shape - std::log(rate);
}

}  // namespace hths
