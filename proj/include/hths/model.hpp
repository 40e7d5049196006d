#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hths/densities.hpp"

namespace hths {

// Local scales (gamma, omega, HS+ auxiliaries, lambda, xi) live in
// [kScaleFloor, kScaleCeiling]; the sampled target is the model density
// restricted to that box. The log-Cauchy families keep ~0.3% of their prior
// mass outside it, where the implied phi is numerically 0 or unshrunk anyway.
inline constexpr double kScaleFloor = 1e-300;
inline constexpr double kScaleCeiling = 1e300;

// Range of logit(p) kept by the sampler: p in [1e-300, 1 - 6.3e-16].
inline constexpr double kLogitFloor = -690.7755278982137;  // log(1e-300)
inline constexpr double kLogitCeiling = 35.0;

// Priors on the global parameters:
//   mu | sigma2 ~ N(mu_mean, mu_scale_multiplier * sigma2)
//   sigma2 ~ InvGamma(sigma2_shape, sigma2_rate)
//   Z ~ Gamma(z_shape, z_rate)
struct GlobalPriors {
  double mu_mean = 0.0;
  double mu_scale_multiplier = 100.0;
  double sigma2_shape = 0.001;
  double sigma2_rate = 0.001;
  double z_shape = 0.5;
  double z_rate = 0.5;

  void validate() const;
};

// Pins mu, sigma2 and Z to constants for the whole chain.
struct FixedGlobals {
  double mu = 0.0;
  double sigma2 = 1.0;
  double z = 1.0;

  void validate() const;
};

// One configuration of every sampled quantity. phi and gamma are always
// populated; the remaining sequences are populated (length n) only for the
// families whose hierarchy carries them and are empty otherwise:
//   omega        HS, HS+, HTHS, HTHS_lambda
//   p            HTHS, HTHS_lambda
//   lambda, xi   HTHS_lambda
//   psi, zeta    HS+ (the two extra gamma layers)
struct ModelState {
  double mu = 0.0;
  double sigma2 = 1.0;
  double z = 1.0;
  std::vector<double> phi;
  std::vector<double> gamma;
  std::vector<double> omega;
  std::vector<double> p;
  std::vector<double> lambda;
  std::vector<double> xi;
  std::vector<double> psi;
  std::vector<double> zeta;

  std::size_t size() const { return phi.size(); }

  double tau(std::size_t i) const { return gamma[i] / (1.0 + gamma[i]); }

  // mu <- median(y), sigma2 <- MAD^2 (1 when the MAD is 0), Z <- 1, phi <- 0,
  // gamma, omega, lambda, xi, psi, zeta <- 1, p <- 1/2. Pinned globals win.
  static ModelState initial(std::span<const double> y, PriorFamily family,
                            const std::optional<FixedGlobals>& fixed = std::nullopt);

  // Throws DivergedChainError (tagged with the iteration) when a length,
  // positivity, box or finiteness constraint fails.
  void check_invariants(PriorFamily family, std::size_t iteration = 0) const;
};

struct ChainConfig {
  std::size_t iterations = 55'000;  // total sweeps including burn-in
  std::size_t burn_in = 5'000;
  std::size_t thinning = 5;
  std::uint64_t seed = 1;
  double slice_width = 2.0;
  std::optional<FixedGlobals> fixed_globals{};
  // Keep gamma (and p) draws in the store, not just phi and the globals.
  bool retain_local_scales = true;

  std::size_t retained() const { return (iterations - burn_in) / thinning; }

  void validate() const;
};

}  // namespace hths
