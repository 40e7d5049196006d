#include "hths/marginals.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "hths/error.hpp"
#include "hths/quadrature.hpp"
#include "hths/special_math.hpp"

namespace hths {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLogSqrtTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// log(exp(a) + exp(b))
double log_add(double a, double b) {
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

QuadratureSpec whole_line(std::vector<double> breakpoints, double relative_tolerance = 1e-12) {
  QuadratureSpec spec;
  spec.lower = -kInf;
  spec.upper = kInf;
  spec.relative_tolerance = relative_tolerance;
  spec.absolute_tolerance = 1e-300;
  spec.max_subdivisions = 4000;
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  spec.breakpoints = std::move(breakpoints);
  return spec;
}

// pi(phi) |phi| sqrt(2 pi) with s = log|phi|, in w = log(gamma phi^2):
//   integral of exp(l(w - 2s) + w/2 - e^w / 2) dw
// where l is the density of log(gamma).
double scaled_phi_integral(PriorFamily family, double s) {
  auto f = [&](double w) {
    return std::exp(log_prior_density_log_gamma(family, w - 2.0 * s) + 0.5 * w - 0.5 * std::exp(w));
  };
  return integrate(f, whole_line({2.0 * s - 20.0, 2.0 * s, 2.0 * s + 20.0, -20.0, 0.0, 4.0}));
}

// Integrand pieces of m(y) and E[tau | y]. Writes log N(y | 0, v) + l(u) as a
// function of the integration variable and also returns log v.
struct LikelihoodTerms {
  double log_weight;
  double log_v;
};

// |y| <= 1: integrate over u = log(gamma) with v = 1 + e^{-u}.
LikelihoodTerms direct_terms(PriorFamily family, double y, double u) {
  const double log_v = softplus(-u);
  return {log_prior_density_log_gamma(family, u) - 0.5 * y * y * std::exp(-log_v) - 0.5 * log_v - kLogSqrtTwoPi, log_v};
}

// |y| > 1: integrate over w = u + 2s with s = log|y|, so that
// v = y^2 (e^{-2s} + e^{-w}); the common factor 1/(|y| sqrt(2 pi)) is left out.
LikelihoodTerms scaled_terms(PriorFamily family, double s, double w) {
  const double log_r = log_add(-2.0 * s, -w);  // log(v / y^2)
  return {log_prior_density_log_gamma(family, w - 2.0 * s) - 0.5 * std::exp(-log_r) - 0.5 * log_r, 2.0 * s + log_r};
}

// log of the integral of exp(log_weight + extra * (-log v)) with the scaling
// above, plus the log of the factor that was left out.
double log_likelihood_integral(PriorFamily family, double y, double tau_power, double relative_tolerance) {
  const double a = std::fabs(y);
  if (a <= 1.0) {
    auto f = [&](double u) {
      const auto t = direct_terms(family, a, u);
      return std::exp(t.log_weight - tau_power * t.log_v);
    };
    return std::log(integrate(f, whole_line({-20.0, 0.0, 20.0}, relative_tolerance)));
  }
  const double s = std::log(a);
  auto f = [&](double w) {
    const auto t = scaled_terms(family, s, w);
    return std::exp(t.log_weight - tau_power * t.log_v);
  };
  const double integral = integrate(f, whole_line({2.0 * s - 20.0, 2.0 * s, -20.0, 0.0, 10.0}, relative_tolerance));
  return std::log(integral) - s - kLogSqrtTwoPi;
}

double log_m(PriorFamily family, double y, double relative_tolerance) {
    if (!std::isfinite(y)) throw DomainError("marginal likelihood needs a finite y");
  return log_likelihood_integral(family, y, 0.0, relative_tolerance);
}

// Phi(hi) - Phi(lo) without cancellation.
double normal_interval(double lo, double hi) {
  const double r = std::numbers::sqrt2 / 2.0;
  if (lo >= 0.0) return 0.5 * (std::erfc(lo * r) - std::erfc(hi * r));
  if (hi <= 0.0) return 0.5 * (std::erfc(-hi * r) - std::erfc(-lo * r));
  return 0.5 * (std::erf(hi * r) - std::erf(lo * r));
}

// log of the BetaPrime(p, 1 - p) density of u = log(gamma), with t = logit(p),
// plus log of dp/dt; the prior of p is applied by the caller.
double log_beta_prime_in_logit(double t, double u) {
  const double log_one_minus_p = -softplus(t);
  const double p = 1.0 / (1.0 + std::exp(-t));
  const double q = 1.0 / (1.0 + std::exp(t));  // 1 - p without cancellation
  const double sine = std::sin(std::numbers::pi * std::min(p, q));
  // p u - log(1 + e^u), written so neither term overflows
  const double exponent = u > 0.0 ? -q * u - std::log1p(std::exp(-u)) : p * u - std::log1p(std::exp(u));
  return std::log(sine) - std::log(std::numbers::pi) + exponent + log_one_minus_p;
}

}  // namespace

double log_density_log_gamma_mixture(PriorFamily family, double u) {
  if (family != PriorFamily::HTHS && family != PriorFamily::HTHSLambda) {
    throw UnsupportedFamilyError(std::string(family_label(family)) + " has no decision-parameter mixture");
  }
  if (std::isnan(u)) throw DomainError("log(gamma) is NaN");
  // The integrand carries p pi(p) (the dp/dt Jacobian's p factor) as
  // p for uniform p and hths_lambda_p_mixture(-log p) otherwise.
  auto f = [&](double t) {
    const double s = softplus(-t);  // -log p
    const double log_p_prior = family == PriorFamily::HTHS ? -s : std::log(hths_lambda_p_mixture(s));
    return std::exp(log_p_prior + log_beta_prime_in_logit(t, u));
  };
  QuadratureSpec spec;
  spec.lower = -740.0;
  spec.upper = 700.0;
  spec.relative_tolerance = 1e-13;
  spec.absolute_tolerance = 1e-300;
  spec.max_subdivisions = 4000;
  // mass concentrates where (1 - p) |u| or p |u| is of order one
  const double l = std::log1p(std::fabs(u));
  spec.breakpoints = {-l - 4.0, -l, -l + 4.0, 0.0, l - 4.0, l, l + 4.0};
  std::sort(spec.breakpoints.begin(), spec.breakpoints.end());
  spec.breakpoints.erase(std::unique(spec.breakpoints.begin(), spec.breakpoints.end()), spec.breakpoints.end());
  return std::log(integrate(f, spec));
}

double log_prior_density_log_gamma(PriorFamily family, double u) {
  if (has_closed_form_gamma(family)) return log_density_log_gamma(family, u);
  return log_density_log_gamma_mixture(family, u);
}

double prior_density_gamma(PriorFamily family, double gamma) {
  if (has_closed_form_gamma(family)) return density_gamma(family, gamma);
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be positive and finite");
  const double u = std::log(gamma);
  return std::exp(log_density_log_gamma_mixture(family, u) - u);
}

double prior_density_tau(PriorFamily family, double tau) {
  if (has_closed_form_gamma(family)) return density_tau(family, tau);
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("tau must lie in (0, 1)");
  // logit(tau) = log(gamma)
  const double u = std::log(tau) - std::log1p(-tau);
  return std::exp(log_density_log_gamma_mixture(family, u) - std::log(tau) - std::log1p(-tau));
}

double log_phi_marginal_at_log(PriorFamily family, double log_abs_phi) {
    if (std::isnan(log_abs_phi) || std::isinf(log_abs_phi)) {
    throw DomainError("log|phi| must be finite");
  }
  return std::log(scaled_phi_integral(family, log_abs_phi)) - log_abs_phi - kLogSqrtTwoPi;
}

PhiDensity phi_marginal(PriorFamily family, double phi) {
    if (std::isnan(phi)) throw DomainError("phi is NaN");
  if (phi == 0.0) return {kInf, true};
  if (std::isinf(phi)) return {0.0, false};
  return {std::exp(log_phi_marginal_at_log(family, std::log(std::fabs(phi)))), false};
}

double phi_marginal_nested(PriorFamily family, double phi) {
    if (phi == 0.0 || !std::isfinite(phi)) throw DomainError("nested phi marginal needs finite phi != 0");
  auto joint = [&](double g) {
    if (g == 0.0) return 0.0;
    return std::exp(std::log(prior_density_gamma(family, g)) + 0.5 * std::log(g) - 0.5 * g * phi * phi - kLogSqrtTwoPi);
  };
  QuadratureSpec spec;
  spec.relative_tolerance = 1e-12;
  spec.absolute_tolerance = 1e-300;
  spec.max_subdivisions = 4000;
  spec.lower = 0.0;
  spec.upper = 1.0;
  spec.substitution = Substitution::logit;
  const double low = integrate(joint, spec);
  spec.lower = 1.0;
  spec.upper = kInf;
  spec.substitution = Substitution::automatic;
  spec.breakpoints = {std::max(2.0, 1.0 / (phi * phi)), std::max(4.0, 10.0 / (phi * phi))};
  return low + integrate(joint, spec);
}

double log_marginal_likelihood(PriorFamily family, double y) { return log_m(family, y, 1e-12); }

double marginal_likelihood(PriorFamily family, double y) { return std::exp(log_marginal_likelihood(family, y)); }

std::vector<double> log_predictive_score(PriorFamily family, std::span<const double> y) {
    std::vector<double> out;
  out.reserve(y.size());
  for (double v : y) {
    if (!std::isfinite(v)) throw DomainError("score grid must be finite");
    const double h = std::max(1e-4, 1e-6 * std::fabs(v));
    if (v + 0.5 * h == v || v - 0.5 * h == v) throw UnderflowError("finite-difference step vanished at y");
    auto f = [&](double x) { return log_m(family, x, 1e-13); };
    auto central = [&](double step) { return (f(v + step) - f(v - step)) / (2.0 * step); };
    out.push_back((4.0 * central(0.5 * h) - central(h)) / 3.0);
  }
  return out;
}

PosteriorShrinkage posterior_shrinkage(PriorFamily family, double y) {
  const double log_mass = log_m(family, y, 1e-12);
  const double log_tau = log_likelihood_integral(family, y, 1.0, 1e-12);
  const double tau = std::exp(log_tau - log_mass);
  return {tau, (1.0 - tau) * y};
}

double theorem2_bound(double a, double phi) {
  if (!(a > 0.0 && a < 0.5)) throw DomainError("theorem2_bound needs 0 < a < 1/2");
  if (!(phi != 0.0) || !std::isfinite(phi)) throw DomainError("theorem2_bound needs finite phi != 0");
  const double x = std::fabs(phi);
  const double half_sq = 0.5 * x * x;
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  const double lower = incomplete_gamma(0.5 + a, half_sq).lower;
  const double upper = incomplete_gamma(0.5 - a, half_sq).upper;
  return a * std::pow(2.0, a - 1.0) / (sqrt_pi * std::pow(x, 1.0 + 2.0 * a)) * lower +
         a * std::pow(2.0, -a - 1.0) / (sqrt_pi * std::pow(x, 1.0 - 2.0 * a)) * upper;
}

double phi_interval_mass(PriorFamily family, double phi0, double delta) {
    if (!std::isfinite(phi0)) throw DomainError("phi0 must be finite");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("interval half-width must be positive");
  const double lo = phi0 - delta;
  const double hi = phi0 + delta;
  auto f = [&](double u) {
    const double root = std::exp(0.5 * u);
    return std::exp(log_prior_density_log_gamma(family, u)) * normal_interval(lo * root, hi * root);
  };
  std::vector<double> breaks = {-2.0 * std::log(delta), 0.0};
  if (phi0 != 0.0) breaks.push_back(-2.0 * std::log(std::fabs(phi0)));
  return integrate(f, whole_line(breaks, 1e-12));
}

KlRiskBound kl_risk_bound(PriorFamily family, double phi0, std::size_t n) {
  if (n == 0) throw DomainError("kl_risk_bound needs n >= 1");
  KlRiskBound r;
  r.n = n;
  r.epsilon = 1.0 / static_cast<double>(n);
  r.half_width = std::sqrt(2.0 * r.epsilon);
  r.mass = phi_interval_mass(family, phi0, r.half_width);
  if (!(r.mass > 0.0)) {
    throw UnderflowError("prior mass of the KL neighbourhood underflowed to 0 (phi0 = " + format_double(phi0) +
                         ", n = " + std::to_string(n) + ")");
  }
  r.bound = r.epsilon - std::log(r.mass) / static_cast<double>(n);
  return r;
}

std::vector<double> symmetric_log_grid(double lo, double hi, std::size_t points_per_side) {
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi) || points_per_side == 0) {
    throw DomainError("log grid needs 0 < lo <= hi and at least one point");
  }
  std::vector<double> side(points_per_side);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t k = 0; k < points_per_side; ++k) {
    const double t = points_per_side == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(points_per_side - 1);
    side[k] = k + 1 == points_per_side ? hi : (k == 0 ? lo : std::exp(a + t * (b - a)));
  }
  std::vector<double> grid;
  for (auto it = side.rbegin(); it != side.rend(); ++it) grid.push_back(-*it);
  grid.insert(grid.end(), side.begin(), side.end());
  return grid;
}

std::vector<std::size_t> log_count_grid(std::size_t lo, std::size_t hi, std::size_t points) {
  if (lo == 0 || hi < lo || points == 0) throw DomainError("count grid needs 1 <= lo <= hi and points >= 1");
  std::vector<std::size_t> grid;
  const double a = std::log(static_cast<double>(lo));
  const double b = std::log(static_cast<double>(hi));
  for (std::size_t k = 0; k < points; ++k) {
    const double t = points == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(points - 1);
    const auto v = static_cast<std::size_t>(std::llround(std::exp(a + t * (b - a))));
    const std::size_t clamped = std::clamp(v, lo, hi);
    if (grid.empty() || grid.back() != clamped) grid.push_back(clamped);
  }
  return grid;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_figure_csv(std::ostream& out, std::span<const FigureRow> rows) {
  out << "family,x,value,curve\n";
  for (const auto& r : rows) {
    out << r.family << ',' << format_double(r.x) << ',' << format_double(r.value) << ',' << r.curve << '\n';
  }
}

}  // namespace hths
