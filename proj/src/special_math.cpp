#include "hths/special_math.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "hths/error.hpp"

namespace hths {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 10000;

void check_domain(double s, double x) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DomainError("incomplete gamma: shape must be positive and finite, got " + std::to_string(s));
  }
  if (!(x >= 0.0)) {
    throw DomainError("incomplete gamma: argument must be nonnegative, got " + std::to_string(x));
  }
}

// log of x^s e^{-x} / Gamma(s)
double log_prefactor(double s, double x) { return s * std::log(x) - x - std::lgamma(s); }

// P(s, x) by the power series; valid for x < s + 1.
double lower_series(double s, double x) {
  double denom = s;
  double term = 1.0 / s;
  double sum = term;
  for (int n = 0; n < kMaxIterations; ++n) {
    denom += 1.0;
    term *= x / denom;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) {
      return sum * std::exp(log_prefactor(s, x));
    }
  }
  throw ConvergenceError("incomplete gamma series did not converge", sum * std::exp(log_prefactor(s, x)), 0.0);
}

// Q(s, x) by the modified Lentz continued fraction; valid for x >= s + 1.
double upper_continued_fraction(double s, double x) {
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) {
      return std::exp(log_prefactor(s, x)) * h;
    }
  }
  throw ConvergenceError("incomplete gamma continued fraction did not converge",
                         std::exp(log_prefactor(s, x)) * h, 0.0);
}

// {P, Q} with P + Q == 1 to rounding.
std::pair<double, double> regularized_pair(double s, double x) {
  check_domain(s, x);
  if (x == 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};
  if (x < s + 1.0) {
    const double p = lower_series(s, x);
    return {p, 1.0 - p};
  }
  const double q = upper_continued_fraction(s, x);
  return {1.0 - q, q};
}

}  // namespace

IncompleteGammaPair incomplete_gamma(double s, double x) {
  const auto [p, q] = regularized_pair(s, x);
  const double complete = std::tgamma(s);
  return {p * complete, q * complete};
}

double regularized_lower_gamma(double s, double x) { return regularized_pair(s, x).first; }

double regularized_upper_gamma(double s, double x) { return regularized_pair(s, x).second; }

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
  return std::lgamma(x);
}

}  // namespace hths
