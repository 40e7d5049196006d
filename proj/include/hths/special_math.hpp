#pragma once

namespace hths {

// Non-regularized lower and upper incomplete gamma values.
struct IncompleteGammaPair {
  double lower = 0.0;
  double upper = 0.0;
};

// Gamma_L(s, x) and Gamma_U(s, x) for s > 0, x >= 0 (x may be +inf).
// Uses the power series for x < s + 1 and a Lentz continued fraction
// otherwise; the complementary value is taken from the complete gamma
// function so lower + upper == tgamma(s) to rounding.
IncompleteGammaPair incomplete_gamma(double s, double x);

// Regularized P(s, x) = Gamma_L(s, x) / Gamma(s).
double regularized_lower_gamma(double s, double x);

// Regularized Q(s, x) = Gamma_U(s, x) / Gamma(s).
double regularized_upper_gamma(double s, double x);

double log_gamma(double x);

}  // namespace hths
