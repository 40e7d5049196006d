#include "hths/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hths/error.hpp"

namespace hths {
namespace {

constexpr double kPi = std::numbers::pi;
const double kLogScaleFloor = std::log(kScaleFloor);
const double kLogScaleCeiling = std::log(kScaleCeiling);
constexpr int kMaxBoxAttempts = 1'000'000;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

void update_phi(ModelState& s, std::span<const double> y, const SamplerSettings& settings, RandomStream& rng) {
  const double sd_scale = std::sqrt(s.sigma2);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (settings.use_likelihood) {
      const auto c = phi_conditional(y[i] - s.mu, s.sigma2, s.gamma[i], s.z);
      s.phi[i] = c.mean + std::sqrt(c.variance) * rng.normal();
    } else {
      s.phi[i] = sd_scale / std::sqrt(s.gamma[i] * s.z) * rng.normal();
    }
  }
}

// Z phi_i^2 / (2 sigma2): the rate contribution of the phi factor to gamma_i.
double phi_rate(const ModelState& s, std::size_t i) { return 0.5 * s.z * s.phi[i] * s.phi[i] / s.sigma2; }

void update_decision(ModelState& s, std::size_t i, const SamplerSettings& settings, RandomStream& rng,
                     SweepCounters* counters) {
  const double log_gamma = std::log(s.gamma[i]);
  const double lambda = s.lambda.empty() ? 1.0 : s.lambda[i];
  const double x0 = std::clamp(logit(s.p[i]), kLogitFloor, kLogitCeiling);
  const double x = slice_sample(
      x0, [&](double v) { return log_decision_conditional_logit(v, log_gamma, lambda); }, settings.slice_width,
      kLogitFloor, kLogitCeiling, rng, counters);
  s.p[i] = logistic(x);
}

void update_locals(ModelState& s, const SamplerSettings& settings, RandomStream& rng, SweepCounters* counters) {
  const std::size_t n = s.size();
  switch (settings.family) {
    case PriorFamily::HS:
      for (std::size_t i = 0; i < n; ++i) {
        const auto c = local_gamma_conditional(PriorFamily::HS, s, i);
        s.gamma[i] = sample_boxed_gamma(c.shape, c.rate, rng, counters);
        s.omega[i] = sample_boxed_gamma(1.0, 1.0 + s.gamma[i], rng, counters);
      }
      return;
    case PriorFamily::HSPlus:
      // gamma | omega ~ G(1/2, omega), omega | psi ~ G(1/2, psi),
      // psi | zeta ~ G(1/2, zeta), zeta ~ G(1/2, 1)
      for (std::size_t i = 0; i < n; ++i) {
        const auto c = local_gamma_conditional(PriorFamily::HSPlus, s, i);
        s.gamma[i] = sample_boxed_gamma(c.shape, c.rate, rng, counters);
        s.omega[i] = sample_boxed_gamma(1.0, s.gamma[i] + s.psi[i], rng, counters);
        s.psi[i] = sample_boxed_gamma(1.0, s.omega[i] + s.zeta[i], rng, counters);
        s.zeta[i] = sample_boxed_gamma(1.0, s.psi[i] + 1.0, rng, counters);
      }
      return;
    case PriorFamily::HTHS:
    case PriorFamily::HTHSLambda:
      // gamma | p, omega ~ G(p, omega), omega | p ~ G(1 - p, 1); the p-dependent
      // normalizers cancel in omega | . and leave sin(pi p) gamma^p in p | .
      for (std::size_t i = 0; i < n; ++i) {
        const auto c = local_gamma_conditional(settings.family, s, i);
        s.gamma[i] = sample_boxed_gamma(c.shape, c.rate, rng, counters);
        s.omega[i] = sample_boxed_gamma(1.0, 1.0 + s.gamma[i], rng, counters);
        update_decision(s, i, settings, rng, counters);
        if (settings.family == PriorFamily::HTHSLambda) {
          // p | lambda ~ Beta(lambda, 1), lambda | xi ~ G(1, xi), xi ~ G(1, 1)
          s.lambda[i] = sample_boxed_gamma(2.0, s.xi[i] - std::log(s.p[i]), rng, counters);
          s.xi[i] = sample_boxed_gamma(2.0, 1.0 + s.lambda[i], rng, counters);
        }
      }
      return;
    case PriorFamily::HTHSPlus:
      for (std::size_t i = 0; i < n; ++i) {
        const double weight = 2.0 * phi_rate(s, i);
        const double u = slice_sample(
            std::log(s.gamma[i]), [weight](double v) { return log_hthsplus_gamma_conditional(v, weight); },
            settings.slice_width, kLogScaleFloor, kLogScaleCeiling, rng, counters);
        s.gamma[i] = std::clamp(std::exp(u), kScaleFloor, kScaleCeiling);
      }
      return;
  }
}

void update_globals(ModelState& s, std::span<const double> y, const SamplerSettings& settings, RandomStream& rng) {
  const auto& pr = settings.priors;
  const double n = static_cast<double>(s.size());

  // mu | sigma2, phi, y
  if (settings.use_likelihood) {
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) sum += y[i] - s.phi[i];
    const double precision = n + 1.0 / pr.mu_scale_multiplier;
    const double mean = (sum + pr.mu_mean / pr.mu_scale_multiplier) / precision;
    s.mu = mean + std::sqrt(s.sigma2 / precision) * rng.normal();
  } else {
    s.mu = pr.mu_mean + std::sqrt(pr.mu_scale_multiplier * s.sigma2) * rng.normal();
  }

  // sigma2 | mu, phi, gamma, Z, y
  double weighted = 0.0;  // sum gamma_i phi_i^2
  for (std::size_t i = 0; i < s.size(); ++i) weighted += s.gamma[i] * s.phi[i] * s.phi[i];
  double shape = pr.sigma2_shape + 0.5 * n + 0.5;
  const double mu_dev = s.mu - pr.mu_mean;
  double rate = pr.sigma2_rate + 0.5 * s.z * weighted + 0.5 * mu_dev * mu_dev / pr.mu_scale_multiplier;
  if (settings.use_likelihood) {
    shape += 0.5 * n;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double r = y[i] - s.mu - s.phi[i];
      rate += 0.5 * r * r;
    }
  }
  s.sigma2 = 1.0 / sample_gamma(shape, rate, rng);

  // Z | phi, gamma, sigma2
  s.z = sample_gamma(pr.z_shape + 0.5 * n, pr.z_rate + 0.5 * weighted / s.sigma2, rng);
}

}  // namespace

NormalConditional phi_conditional(double y_minus_mu, double sigma2, double gamma, double z) {
  const double shrink = 1.0 + gamma * z;
  return {y_minus_mu / shrink, sigma2 / shrink};
}

GammaConditional local_gamma_conditional(PriorFamily family, const ModelState& state, std::size_t i) {
  switch (family) {
    case PriorFamily::HS:
    case PriorFamily::HSPlus:
      return {1.0, state.omega[i] + phi_rate(state, i)};
    case PriorFamily::HTHS:
    case PriorFamily::HTHSLambda:
      return {state.p[i] + 0.5, state.omega[i] + phi_rate(state, i)};
    case PriorFamily::HTHSPlus:
      break;
  }
  throw UnsupportedFamilyError("HTHS+ gamma has no conjugate conditional; it is slice sampled");
}

double sample_boxed_gamma(double shape, double rate, RandomStream& rng, SweepCounters* counters) {
  for (int attempt = 0; attempt < kMaxBoxAttempts; ++attempt) {
    const double lg = sample_log_gamma(shape, rate, rng);
    if (lg >= kLogScaleFloor && lg <= kLogScaleCeiling) return std::clamp(std::exp(lg), kScaleFloor, kScaleCeiling);
    if (counters) ++counters->box_rejections;
  }
  throw DivergedChainError("Gamma(" + std::to_string(shape) + ", " + std::to_string(rate) +
                           ") holds too little mass inside [1e-300, 1e300]");
}

double log_decision_conditional_logit(double x, double log_gamma, double lambda) {
  const double log_p = -softplus(-x);
  const double log_q = -softplus(x);
  const double p = logistic(x);
  const double smaller = x < 0.0 ? p : logistic(-x);
  return std::log(std::sin(kPi * smaller)) + p * log_gamma + lambda * log_p + log_q;
}

double log_hthsplus_gamma_conditional(double u, double precision_weight) {
  return -std::log(u * u + 4.0 * kPi * kPi) + 0.5 * u - 0.5 * std::exp(u) * precision_weight;
}

void gibbs_sweep(ModelState& state, std::span<const double> y, const SamplerSettings& settings, RandomStream& rng,
                 SweepCounters* counters) {
  if (settings.use_likelihood && y.size() != state.size()) {
    throw DomainError("gibbs_sweep: data length " + std::to_string(y.size()) + " does not match state length " +
                      std::to_string(state.size()));
  }
  try {
    update_phi(state, y, settings, rng);
    update_locals(state, settings, rng, counters);
    if (settings.fixed_globals) {
      state.mu = settings.fixed_globals->mu;
      state.sigma2 = settings.fixed_globals->sigma2;
      state.z = settings.fixed_globals->z;
    } else {
      update_globals(state, y, settings, rng);
    }
  } catch (const DomainError& e) {
    // a conditional whose parameters overflowed
    throw DivergedChainError(std::string("non-finite full conditional: ") + e.what());
  }
  state.check_invariants(settings.family);
}

}  // namespace hths
