#include "hths/densities.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "hths/error.hpp"
#include "hths/quadrature.hpp"

namespace hths {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLogPi = 1.1447298858494002;  // log(pi)

void require_closed_form(PriorFamily family, const char* what) {
  if (family == PriorFamily::HTHSLambda) {
    throw UnsupportedFamilyError(std::string(what) +
                                 ": HTHS_lambda has no closed-form marginal; use the quadrature marginals instead");
  }
}

// log(g) / (g - 1), continuous through g = 1.
double log_ratio(double g) {
  const double d = g - 1.0;
  if (std::fabs(d) < 1e-3) {
    return 1.0 - d / 2.0 + d * d / 3.0 - d * d * d / 4.0;
  }
  return std::log(g) / d;
}

// logit(tau) / (2 tau - 1), continuous through tau = 1/2.
double logit_ratio(double tau) {
  const double e = 2.0 * tau - 1.0;
  if (std::fabs(e) < 1e-3) {
    const double e2 = e * e;
    return 2.0 * (1.0 + e2 / 3.0 + e2 * e2 / 5.0 + e2 * e2 * e2 / 7.0);
  }
  return 2.0 * std::atanh(e) / e;
}

double logit(double tau) { return std::log(tau) - std::log1p(-tau); }

// log(1 + e^x)
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// log(u / (e^u - 1)), continuous through u = 0.
double log_u_over_expm1(double u) {
  if (std::fabs(u) < 1e-3) {
    const double u2 = u * u;
    return std::log1p(-u / 2.0 + u2 / 12.0 - u2 * u2 / 720.0);
  }
  if (u > 0.0) return std::log(u) - u - std::log1p(-std::exp(-u));
  return std::log(u / std::expm1(u));
}

// h(s) = integral_0^inf lambda e^{-lambda s} (1 + lambda)^-2 d lambda, so the
// HTHS_lambda p density is h(-log p) / p. Integrated in v = log(lambda): for
// p near 1 the mass sits near lambda ~ 1/s, beyond what u = lambda/(1+lambda)
// can resolve below 1.
double lambda_mixture_integral(double s) {
  QuadratureSpec spec;
  spec.lower = -QuadratureSpec::infinity;
  spec.upper = QuadratureSpec::infinity;
  spec.relative_tolerance = 1e-10;
  spec.absolute_tolerance = 1e-300;
  spec.breakpoints = {0.0, -std::log(s)};
  return integrate(
      [s](double v) {
        const double softplus_v = v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
        return std::exp(2.0 * v - s * std::exp(v) - 2.0 * softplus_v);
      },
      spec);
}

// -h'(s) = integral_0^inf lambda^2 e^{-lambda s} (1 + lambda)^-2 d lambda
double lambda_mixture_integral_slope(double s) {
  QuadratureSpec spec;
  spec.lower = -QuadratureSpec::infinity;
  spec.upper = QuadratureSpec::infinity;
  spec.relative_tolerance = 1e-10;
  spec.absolute_tolerance = 1e-300;
  spec.breakpoints = {0.0, -std::log(s)};
  return integrate(
      [s](double v) {
        const double softplus_v = v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
        return std::exp(3.0 * v - s * std::exp(v) - 2.0 * softplus_v);
      },
      spec);
}

constexpr double kTableLogSMin = -37.0;
constexpr double kTableLogSMax = 6.7;
constexpr std::size_t kTableSize = 2048;

// Cubic Hermite interpolant on a uniform grid from values and exact slopes,
// with the Fritsch-Carlson limiter keeping each piece monotone.
class MonotoneCubic {
 public:
  MonotoneCubic(double x0, double step, std::vector<double> y, std::vector<double> slope)
      : x0_(x0), step_(step), y_(std::move(y)), slope_(std::move(slope)) {
    for (std::size_t i = 0; i + 1 < y_.size(); ++i) {
      const double secant = (y_[i + 1] - y_[i]) / step_;
      if (secant == 0.0) {
        slope_[i] = slope_[i + 1] = 0.0;
        continue;
      }
      const double a = slope_[i] / secant;
      const double b = slope_[i + 1] / secant;
      if (a < 0.0) slope_[i] = 0.0;
      if (b < 0.0) slope_[i + 1] = 0.0;
      const double r = a * a + b * b;
      if (r > 9.0) {
        const double t = 3.0 / std::sqrt(r);
        slope_[i] = t * a * secant;
        slope_[i + 1] = t * b * secant;
      }
    }
  }

  double operator()(double x) const {
    const double pos = (x - x0_) / step_;
    auto i = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, static_cast<double>(y_.size() - 2)));
    const double t = pos - static_cast<double>(i);
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * step_ * slope_[i] + (-2 * t3 + 3 * t2) * y_[i + 1] +
           (t3 - t2) * step_ * slope_[i + 1];
  }

 private:
  double x0_;
  double step_;
  std::vector<double> y_;
  std::vector<double> slope_;
};

class LambdaMixtureTable {
 public:
  LambdaMixtureTable() : interpolant_(build()) {}

  bool covers(double log_s) const { return log_s >= kTableLogSMin && log_s <= kTableLogSMax; }
  double log_h(double log_s) const { return interpolant_(log_s); }

 private:
  static MonotoneCubic build() {
    std::vector<double> log_h(kTableSize);
    std::vector<double> slope(kTableSize);
    const double step = (kTableLogSMax - kTableLogSMin) / static_cast<double>(kTableSize - 1);
    for (std::size_t i = 0; i < kTableSize; ++i) {
      const double s = std::exp(kTableLogSMin + step * static_cast<double>(i));
      const double h = lambda_mixture_integral(s);
      log_h[i] = std::log(h);
      slope[i] = -s * lambda_mixture_integral_slope(s) / h;  // d log h / d log s
    }
    return MonotoneCubic(kTableLogSMin, step, std::move(log_h), std::move(slope));
  }

  MonotoneCubic interpolant_;
};

const LambdaMixtureTable& lambda_table() {
  static const LambdaMixtureTable table;
  return table;
}

}  // namespace

std::string_view family_label(PriorFamily family) {
  switch (family) {
    case PriorFamily::HS: return "HS";
    case PriorFamily::HSPlus: return "HS+";
    case PriorFamily::HTHS: return "HTHS";
    case PriorFamily::HTHSPlus: return "HTHS+";
    case PriorFamily::HTHSLambda: return "HTHS_lambda";
  }
  return "?";
}

PriorFamily parse_family(std::string_view text) {
  std::string key;
  for (char c : text) {
    if (c == '-' || c == '_' || c == ' ') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "hs") return PriorFamily::HS;
  if (key == "hs+" || key == "hsplus") return PriorFamily::HSPlus;
  if (key == "hths") return PriorFamily::HTHS;
  if (key == "hths+" || key == "hthsplus") return PriorFamily::HTHSPlus;
  if (key == "hthslambda" || key == "hthsl" || key == "hthsλ") return PriorFamily::HTHSLambda;
  throw std::invalid_argument("unknown prior family '" + std::string(text) +
                              "' (expected hs, hs+, hths, hths+, hths_lambda)");
}

bool has_closed_form_gamma(PriorFamily family) { return family != PriorFamily::HTHSLambda; }

bool has_decision_parameter(PriorFamily family) {
  return family == PriorFamily::HTHS || family == PriorFamily::HTHSLambda;
}

LocalScale LocalScale::from_gamma(double gamma) {
  if (!(gamma > 0.0)) throw DomainError("local scale gamma must be positive");
  return {gamma, gamma / (1.0 + gamma)};
}

LocalScale LocalScale::from_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("shrinkage profile tau must lie in (0, 1)");
  return {tau / (1.0 - tau), tau};
}

double log_density_gamma(PriorFamily family, double gamma) {
  require_closed_form(family, "density_gamma");
  if (!(gamma > 0.0)) throw DomainError("density_gamma: gamma must be positive");
  const double lg = std::log(gamma);
  switch (family) {
    case PriorFamily::HS:
      return -0.5 * lg - kLogPi - std::log1p(gamma);
    case PriorFamily::HSPlus:
      return -0.5 * lg - 2.0 * kLogPi + std::log(log_ratio(gamma));
    case PriorFamily::HTHS:
      return -lg - std::log(lg * lg + kPi * kPi);
    case PriorFamily::HTHSPlus:
      return std::log(2.0) - lg - std::log(lg * lg + 4.0 * kPi * kPi);
    case PriorFamily::HTHSLambda:
      break;
  }
  throw UnsupportedFamilyError("density_gamma: unsupported family");
}

double density_gamma(PriorFamily family, double gamma) { return std::exp(log_density_gamma(family, gamma)); }

double log_density_tau(PriorFamily family, double tau) {
  require_closed_form(family, "density_tau");
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("density_tau: tau must lie strictly inside (0, 1)");
  const double log_tt = std::log(tau) + std::log1p(-tau);  // log(tau (1 - tau))
  switch (family) {
    case PriorFamily::HS:
      return -0.5 * log_tt - kLogPi;
    case PriorFamily::HSPlus:
      return -0.5 * log_tt - 2.0 * kLogPi + std::log(logit_ratio(tau));
    case PriorFamily::HTHS: {
      const double l = logit(tau);
      return -log_tt - std::log(l * l + kPi * kPi);
    }
    case PriorFamily::HTHSPlus: {
      const double l = logit(tau);
      return std::log(2.0) - log_tt - std::log(l * l + 4.0 * kPi * kPi);
    }
    case PriorFamily::HTHSLambda:
      break;
  }
  throw UnsupportedFamilyError("density_tau: unsupported family");
}

double density_tau(PriorFamily family, double tau) { return std::exp(log_density_tau(family, tau)); }

double log_density_log_gamma(PriorFamily family, double u) {
  require_closed_form(family, "density of log gamma");
  if (std::isnan(u)) throw DomainError("density of log gamma: NaN argument");
  switch (family) {
    case PriorFamily::HS:
      return 0.5 * u - kLogPi - softplus(u);
    case PriorFamily::HSPlus:
      return 0.5 * u - 2.0 * kLogPi + log_u_over_expm1(u);
    case PriorFamily::HTHS:
      return -std::log(u * u + kPi * kPi);
    case PriorFamily::HTHSPlus:
      return std::log(2.0) - std::log(u * u + 4.0 * kPi * kPi);
    case PriorFamily::HTHSLambda:
      break;
  }
  throw UnsupportedFamilyError("density of log gamma: unsupported family");
}

double log_density_tau_at_logit(PriorFamily family, double s) {
  // tau (1 - tau) = e^{-softplus(-s) - softplus(s)}; d tau / d s = tau (1 - tau)
  const double log_tt = -softplus(-s) - softplus(s);
  return log_density_log_gamma(family, s) - log_tt;
}

double log_cauchy_scale(PriorFamily family) {
  switch (family) {
    case PriorFamily::HTHS: return kPi;
    case PriorFamily::HTHSPlus: return 2.0 * kPi;
    default: break;
  }
  throw UnsupportedFamilyError("log-Cauchy marginal exists only for HTHS and HTHS+");
}

double sample_gamma_marginal(PriorFamily family, double u) {
  const double scale = log_cauchy_scale(family);
  if (!(u > 0.0 && u < 1.0)) throw DomainError("sample_gamma_marginal: u must lie in (0, 1)");
  return std::exp(scale * std::tan(kPi * (u - 0.5)));
}

HierarchyDraw sample_gamma_hierarchy(PriorFamily family, RandomStream& rng) {
  switch (family) {
    case PriorFamily::HS: {
      const double omega = sample_gamma(0.5, 1.0, rng);
      return {sample_gamma(0.5, omega, rng), omega, 0.5};
    }
    case PriorFamily::HSPlus: {
      const double zeta = sample_gamma(0.5, 1.0, rng);
      const double psi = sample_gamma(0.5, zeta, rng);
      const double omega = sample_gamma(0.5, psi, rng);
      return {sample_gamma(0.5, omega, rng), omega, 0.5};
    }
    case PriorFamily::HTHS: {
      const double p = rng.uniform();
      // log space: shapes p and 1 - p can be tiny enough to underflow a variate
      const double log_omega = sample_log_gamma(1.0 - p, 1.0, rng);
      const double log_gamma = sample_log_gamma(p, 1.0, rng) - log_omega;
      return {std::exp(log_gamma), std::exp(log_omega), p};
    }
    default:
      break;
  }
  throw UnsupportedFamilyError("sample_gamma_hierarchy supports HS, HS+ and HTHS only, got " +
                               std::string(family_label(family)));
}

double hths_lambda_p_density_direct(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("p density: p must lie in (0, 1)");
  const double s = -std::log(p);
  return lambda_mixture_integral(s) / p;
}

namespace {

// Expansions of h(s) = integral of lambda e^{-lambda s} (1 + lambda)^{-2}
// outside the table. Small s: the integral is dominated by lambda ~ 1/s.
// Large s: termwise integration of the binomial series of (1 + lambda)^{-2}.
double lambda_mixture_small_s(double s) {
  const double euler = std::numbers::egamma;
  const double log_s = std::log(s);
  return -log_s - euler - 1.0 + s * (1.0 - 2.0 * euler - 2.0 * log_s);
}

double lambda_mixture_large_s(double s) {
  const double x = 1.0 / s;
  // coefficients (-1)^k (k + 1) (k + 1)!
  return x * x * (1.0 + x * (-4.0 + x * (18.0 + x * (-96.0 + x * (600.0 + x * (-4320.0 + x * 35280.0))))));
}

double lambda_mixture(double s) {
  const double log_s = std::log(s);
  const auto& table = lambda_table();
  if (table.covers(log_s)) return std::exp(table.log_h(log_s));
  return log_s < kTableLogSMin ? lambda_mixture_small_s(s) : lambda_mixture_large_s(s);
}

}  // namespace

double hths_lambda_p_mixture(double s) {
  if (!(s > 0.0)) throw DomainError("p mixture: s = -log p must be positive");
  if (std::isinf(s)) return 0.0;
  return lambda_mixture(s);
}

double hths_lambda_p_density(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("p density: p must lie in (0, 1)");
  return lambda_mixture(-std::log(p)) / p;
}

DecisionDensity density_p(DecisionPrior variant, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("density_p: p must lie in (0, 1)");
  switch (variant) {
    case DecisionPrior::HSFixed: return {true, 0.5, 0.0};
    case DecisionPrior::HTHSUniform: return {false, 0.5, 1.0};
    case DecisionPrior::HTHSLambda: return {false, 0.5, hths_lambda_p_density(p)};
  }
  throw DomainError("density_p: unknown variant");
}

}  // namespace hths
