#pragma once

// Marginal quantities of the normal-means model with mu = 0, sigma2 = 1,
// Z = 1: the prior density of phi, the marginal likelihood m(y), its score,
// posterior shrinkage, and the Kullback-Leibler risk bound. All gamma
// integrals run over the whole real line in log(gamma). HTHS_lambda has no
// closed-form gamma density; its density of log(gamma) is itself a
// quadrature over p, which makes every quantity below roughly a hundred
// times slower for that family.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hths/densities.hpp"

namespace hths {

// Density of u = log(gamma) as a mixture over the decision parameter:
// gamma | p ~ BetaPrime(p, 1 - p), p ~ Uniform(0, 1) (HTHS) or the
// HTHS_lambda marginal of p. Other families throw UnsupportedFamilyError.
double log_density_log_gamma_mixture(PriorFamily family, double u);

// Closed form where one exists, the mixture above otherwise.
double log_prior_density_log_gamma(PriorFamily family, double u);

// gamma and tau densities for any family (HTHS_lambda by the mixture).
double prior_density_gamma(PriorFamily family, double gamma);
double prior_density_tau(PriorFamily family, double tau);

// pi(phi), or a flag that phi = 0 sits on the density's asymptote.
struct PhiDensity {
  double value = 0.0;
  bool asymptote = false;
};

PhiDensity phi_marginal(PriorFamily family, double phi);

// log pi(phi) at phi = exp(log_abs_phi); finite for every real argument, so
// usable far outside the range where pi(phi) itself is representable.
double log_phi_marginal_at_log(PriorFamily family, double log_abs_phi);

// pi(phi) by the nested route: the joint density N(phi | 0, 1/gamma) pi(gamma)
// integrated over gamma on the linear scale in (0, 1] and [1, inf). Slower;
// kept as an independent check of phi_marginal.
double phi_marginal_nested(PriorFamily family, double phi);

// m(y) = integral of N(y | 0, 1 + 1/gamma) pi(gamma) d gamma.
double marginal_likelihood(PriorFamily family, double y);
double log_marginal_likelihood(PriorFamily family, double y);

// d/dy log m(y) by central differences (h = max(1e-4, 1e-6 |y|)) with one
// Richardson step.
std::vector<double> log_predictive_score(PriorFamily family, std::span<const double> y);

struct PosteriorShrinkage {
  double mean_tau = 0.0;  // E[tau | y]
  double mean_phi = 0.0;  // E[phi | y] = (1 - E[tau | y]) y
};

PosteriorShrinkage posterior_shrinkage(PriorFamily family, double y);

// (a 2^{a-1} / (sqrt(pi) |phi|^{1+2a})) Gamma_L(1/2 + a, phi^2 / 2)
//   + (a 2^{-a-1} / (sqrt(pi) |phi|^{1-2a})) Gamma_U(1/2 - a, phi^2 / 2)
// for 0 < a < 1/2 and phi != 0.
double theorem2_bound(double a, double phi);

// Prior mass of (phi0 - delta, phi0 + delta), integrated as
// E_gamma[Phi((phi0 + delta) sqrt(gamma)) - Phi((phi0 - delta) sqrt(gamma))].
double phi_interval_mass(PriorFamily family, double phi0, double delta);

struct KlRiskBound {
  std::size_t n = 0;
  double epsilon = 0.0;     // 1/n
  double half_width = 0.0;  // sqrt(2 epsilon)
  double mass = 0.0;        // pi(A_epsilon)
  double bound = 0.0;       // epsilon - log(mass) / n
};

// Throws UnderflowError when pi(A_epsilon) underflows to 0.
KlRiskBound kl_risk_bound(PriorFamily family, double phi0, std::size_t n);

// Symmetric log-spaced grid: -hi .. -lo, lo .. hi with points_per_side each.
std::vector<double> symmetric_log_grid(double lo, double hi, std::size_t points_per_side);
// Log-spaced grid of counts from lo to hi, rounded and deduplicated.
std::vector<std::size_t> log_count_grid(std::size_t lo, std::size_t hi, std::size_t points);

struct FigureRow {
  std::string family;
  double x = 0.0;
  double value = 0.0;
  std::string curve;
};

// Comma-separated with a "family,x,value,curve" header, shortest round-trip
// numbers and '\n' line endings.
void write_figure_csv(std::ostream& out, std::span<const FigureRow> rows);

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace hths
