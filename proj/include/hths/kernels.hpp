#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>

#include "hths/densities.hpp"
#include "hths/model.hpp"
#include "hths/random.hpp"

namespace hths {

struct SamplerSettings {
  PriorFamily family = PriorFamily::HTHS;
  GlobalPriors priors{};
  std::optional<FixedGlobals> fixed_globals{};
  double slice_width = 2.0;
  // When false the observations are ignored: every kernel targets the prior,
  // which must then be left invariant by a sweep.
  bool use_likelihood = true;
};

struct SweepCounters {
  std::uint64_t slice_updates = 0;
  std::uint64_t slice_evaluations = 0;
  std::uint64_t box_rejections = 0;

  SweepCounters& operator+=(const SweepCounters& other) {
    slice_updates += other.slice_updates;
    slice_evaluations += other.slice_evaluations;
    box_rejections += other.box_rejections;
    return *this;
  }
};

// One systematic-scan Gibbs sweep: phi, then the family's local layers, then
// the unpinned globals mu, sigma2, Z. Throws DivergedChainError if the state
// leaves its box.
void gibbs_sweep(ModelState& state, std::span<const double> y, const SamplerSettings& settings, RandomStream& rng,
                 SweepCounters* counters = nullptr);

struct NormalConditional {
  double mean = 0.0;
  double variance = 1.0;
};

// phi_i | y_i, mu, sigma2, gamma_i, Z.
NormalConditional phi_conditional(double y_minus_mu, double sigma2, double gamma, double z);

struct GammaConditional {
  double shape = 1.0;
  double rate = 1.0;
};

// gamma_i | phi_i, omega_i (, p_i), sigma2, Z for the conjugate families
// HS, HS+, HTHS, HTHS_lambda: shape (prior shape + 1/2) and rate
// (omega_i + Z phi_i^2 / (2 sigma2)).
GammaConditional local_gamma_conditional(PriorFamily family, const ModelState& state, std::size_t i);

// Gamma(shape, rate) restricted to [kScaleFloor, kScaleCeiling], drawn in log
// space with rejection. Throws DivergedChainError if the box holds too little
// mass to hit.
double sample_boxed_gamma(double shape, double rate, RandomStream& rng, SweepCounters* counters = nullptr);

// Unnormalized log full conditional of p at logit(p) = x, including the
// d p / d x Jacobian: log sin(pi p) + p log(gamma) + (lambda - 1) log p
// + log p + log(1 - p). lambda = 1 gives the uniform-prior (HTHS) case.
double log_decision_conditional_logit(double x, double log_gamma, double lambda);

// Unnormalized log full conditional of u = log(gamma) under HTHS+: the
// log-Cauchy(2 pi) density of u times the phi-likelihood factor
// gamma^{1/2} exp(-gamma Z phi^2 / (2 sigma2)). precision_weight is
// Z phi^2 / sigma2.
double log_hthsplus_gamma_conditional(double u, double precision_weight);

// Univariate slice sampler (stepping out, then shrinkage) for a log density
// supported on [lower, upper]. Returns the new point.
template <class LogDensity>
double slice_sample(double x0, LogDensity&& log_density, double width, double lower, double upper,
                    RandomStream& rng, SweepCounters* counters = nullptr, int max_steps = 100) {
  std::uint64_t evaluations = 1;
  const double level = log_density(x0) - rng.exponential();
  double left = x0 - width * rng.uniform();
  double right = left + width;
  int steps_left = static_cast<int>(std::floor(max_steps * rng.uniform()));
  int steps_right = max_steps - 1 - steps_left;
  while (steps_left > 0 && left > lower && (++evaluations, log_density(left) > level)) {
    left -= width;
    --steps_left;
  }
  while (steps_right > 0 && right < upper && (++evaluations, log_density(right) > level)) {
    right += width;
    --steps_right;
  }
  left = std::max(left, lower);
  right = std::min(right, upper);
  for (;;) {
    const double x1 = left + (right - left) * rng.uniform();
    ++evaluations;
    if (log_density(x1) > level) {
      if (counters) {
        ++counters->slice_updates;
        counters->slice_evaluations += evaluations;
      }
      return x1;
    }
    if (x1 < x0) {
      left = x1;
    } else {
      right = x1;
    }
    if (!(right - left > 0.0)) {
      // interval collapsed onto x0 at double resolution
      if (counters) {
        ++counters->slice_updates;
        counters->slice_evaluations += evaluations;
      }
      return x0;
    }
  }
}

}  // namespace hths
