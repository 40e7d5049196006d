#pragma once

#include <array>
#include <string_view>

#include "hths/random.hpp"

namespace hths {

enum class PriorFamily { HS, HSPlus, HTHS, HTHSPlus, HTHSLambda };

inline constexpr std::array<PriorFamily, 5> kAllFamilies = {
    PriorFamily::HS, PriorFamily::HSPlus, PriorFamily::HTHS, PriorFamily::HTHSPlus, PriorFamily::HTHSLambda};

// Families whose gamma marginal has a closed form.
inline constexpr std::array<PriorFamily, 4> kClosedFormFamilies = {PriorFamily::HS, PriorFamily::HSPlus,
                                                                   PriorFamily::HTHS, PriorFamily::HTHSPlus};

// Display label: "HS", "HS+", "HTHS", "HTHS+", "HTHS_lambda".
std::string_view family_label(PriorFamily family);

// Accepts labels and CLI spellings ("hs", "hsplus", "hs+", "hths_lambda", "hthslambda", ...).
PriorFamily parse_family(std::string_view text);

bool has_closed_form_gamma(PriorFamily family);

// Families carrying the local decision parameter p.
bool has_decision_parameter(PriorFamily family);

// gamma and its shrinkage profile tau = gamma / (1 + gamma).
struct LocalScale {
  double gamma = 1.0;
  double tau = 0.5;

  static LocalScale from_gamma(double gamma);
  static LocalScale from_tau(double tau);
};

double log_density_gamma(PriorFamily family, double gamma);
double density_gamma(PriorFamily family, double gamma);

double log_density_tau(PriorFamily family, double tau);
double density_tau(PriorFamily family, double tau);

// Log density of u = log(gamma), i.e. log(gamma * pi(gamma)), evaluated
// without forming gamma. Valid for every real u; the log-Cauchy families keep
// ~0.3% of their mass beyond |u| = 700, where gamma itself is not a double.
double log_density_log_gamma(PriorFamily family, double log_gamma);

// log density_tau at tau = logistic(s), computed from s without rounding tau
// to 0 or 1. Note logit(tau) == log(gamma).
double log_density_tau_at_logit(PriorFamily family, double s);

// Inverse CDF of the log-Cauchy gamma marginal (HTHS: scale pi, HTHS+: 2 pi).
double sample_gamma_marginal(PriorFamily family, double u);

// Scale of the Cauchy law of log(gamma) for HTHS / HTHS+.
double log_cauchy_scale(PriorFamily family);

struct HierarchyDraw {
  double gamma = 1.0;
  double omega = 1.0;
  // Shape parameter of the gamma layer; 1/2 for the HS families.
  double p = 0.5;
};

// One joint draw from the HS, HS+ (four gamma layers) or HTHS (uniform p)
// generative hierarchy.
HierarchyDraw sample_gamma_hierarchy(PriorFamily family, RandomStream& rng);

enum class DecisionPrior { HSFixed, HTHSUniform, HTHSLambda };

// Prior of p. HS fixes p at 1/2, which has no density on (0, 1); that case
// is reported as a point mass rather than a value.
struct DecisionDensity {
  bool point_mass = false;
  double location = 0.5;  // meaningful only when point_mass
  double value = 0.0;     // density on (0, 1) otherwise
};

DecisionDensity density_p(DecisionPrior variant, double p);

// HTHS_lambda marginal of p: integral over lambda of lambda p^(lambda-1) (1+lambda)^-2.
// Served from a lazily built, immutable interpolation table.
double hths_lambda_p_density(double p);

// The same quantity by direct quadrature, bypassing the table.
double hths_lambda_p_density_direct(double p);

// p * pi(p) at p = exp(-s), s > 0: the p density in log coordinates. Resolves
// p far below the smallest double.
double hths_lambda_p_mixture(double s);

}  // namespace hths
