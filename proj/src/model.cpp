#include "hths/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hths/error.hpp"

namespace hths {
namespace {

double median_of(std::vector<double> values) {
  const std::size_t mid = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  return values[mid];
}

[[noreturn]] void diverged(const std::string& what, std::size_t iteration) {
  throw DivergedChainError("chain diverged at iteration " + std::to_string(iteration) + ": " + what, iteration);
}

void check_box(const std::vector<double>& values, std::size_t n, const char* name, std::size_t iteration) {
  if (values.size() != n) diverged(std::string(name) + " has the wrong length", iteration);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(values[i] >= kScaleFloor && values[i] <= kScaleCeiling)) {
      diverged(std::string(name) + "[" + std::to_string(i) + "] = " + std::to_string(values[i]) +
                   " left [1e-300, 1e300]",
               iteration);
    }
  }
}

}  // namespace

void GlobalPriors::validate() const {
  if (!std::isfinite(mu_mean)) throw DomainError("mu_mean must be finite");
  for (double v : {mu_scale_multiplier, sigma2_shape, sigma2_rate, z_shape, z_rate}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError("global prior scale, shape and rate entries must be positive and finite");
    }
  }
}

void FixedGlobals::validate() const {
  if (!std::isfinite(mu)) throw DomainError("pinned mu must be finite");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("pinned sigma2 must be positive");
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("pinned Z must be positive");
}

void ChainConfig::validate() const {
  if (!(iterations > burn_in)) throw DomainError("chain iterations must exceed burn_in");
  if (thinning < 1) throw DomainError("thinning must be at least 1");
  if (!(slice_width > 0.0) || !std::isfinite(slice_width)) throw DomainError("slice_width must be positive");
  if (fixed_globals) fixed_globals->validate();
}

ModelState ModelState::initial(std::span<const double> y, PriorFamily family,
                               const std::optional<FixedGlobals>& fixed) {
  if (y.empty()) throw DomainError("at least one observation is required");
  for (double v : y) {
    if (!std::isfinite(v)) throw DomainError("observations must be finite");
  }
  const std::size_t n = y.size();
  ModelState state;
  if (fixed) {
    fixed->validate();
    state.mu = fixed->mu;
    state.sigma2 = fixed->sigma2;
    state.z = fixed->z;
  } else {
    std::vector<double> values(y.begin(), y.end());
    state.mu = median_of(values);
    for (auto& v : values) v = std::fabs(v - state.mu);
    const double mad = median_of(std::move(values));
    state.sigma2 = mad > 0.0 ? mad * mad : 1.0;
    state.z = 1.0;
  }
  state.phi.assign(n, 0.0);
  state.gamma.assign(n, 1.0);
  if (family != PriorFamily::HTHSPlus) state.omega.assign(n, 1.0);
  if (has_decision_parameter(family)) state.p.assign(n, 0.5);
  if (family == PriorFamily::HTHSLambda) {
    state.lambda.assign(n, 1.0);
    state.xi.assign(n, 1.0);
  }
  if (family == PriorFamily::HSPlus) {
    state.psi.assign(n, 1.0);
    state.zeta.assign(n, 1.0);
  }
  return state;
}

void ModelState::check_invariants(PriorFamily family, std::size_t iteration) const {
  const std::size_t n = phi.size();
  if (n == 0) diverged("empty state", iteration);
  if (!std::isfinite(mu)) diverged("mu is not finite", iteration);
  if (!(sigma2 >= kScaleFloor && sigma2 <= kScaleCeiling)) {
    diverged("sigma2 = " + std::to_string(sigma2) + " left [1e-300, 1e300]", iteration);
  }
  if (!(z >= kScaleFloor && z <= kScaleCeiling)) {
    diverged("Z = " + std::to_string(z) + " left [1e-300, 1e300]", iteration);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(phi[i])) diverged("phi[" + std::to_string(i) + "] is not finite", iteration);
  }
  check_box(gamma, n, "gamma", iteration);
  const auto expect = [&](const std::vector<double>& v, bool used, const char* name) {
    if (used) {
      check_box(v, n, name, iteration);
    } else if (!v.empty()) {
      diverged(std::string(name) + " is populated for a family that does not use it", iteration);
    }
  };
  expect(omega, family != PriorFamily::HTHSPlus, "omega");
  expect(lambda, family == PriorFamily::HTHSLambda, "lambda");
  expect(xi, family == PriorFamily::HTHSLambda, "xi");
  expect(psi, family == PriorFamily::HSPlus, "psi");
  expect(zeta, family == PriorFamily::HSPlus, "zeta");
  if (has_decision_parameter(family)) {
    if (p.size() != n) diverged("p has the wrong length", iteration);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(p[i] > 0.0 && p[i] < 1.0)) diverged("p[" + std::to_string(i) + "] left (0, 1)", iteration);
    }
  } else if (!p.empty()) {
    diverged("p is populated for a family without a decision parameter", iteration);
  }
}

}  // namespace hths
