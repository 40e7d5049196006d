#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "hths/error.hpp"
#include "hths/marginals.hpp"
#include "hths/quadrature.hpp"

using namespace hths;

namespace {

constexpr PriorFamily kFour[] = {PriorFamily::HS, PriorFamily::HSPlus, PriorFamily::HTHS, PriorFamily::HTHSPlus};

double pi_phi(PriorFamily f, double phi) { return phi_marginal(f, phi).value; }

}  // namespace

TEST_CASE("phi marginal: symmetry, asymptote, nested route") {
  for (PriorFamily f : kFour) {
    CAPTURE(family_label(f));
    CHECK(pi_phi(f, 1.5) == doctest::Approx(pi_phi(f, -1.5)).epsilon(1e-10));
    const auto origin = phi_marginal(f, 0.0);
    CHECK(origin.asymptote);
    CHECK(std::isinf(origin.value));
    CHECK_FALSE(phi_marginal(f, 1e-3).asymptote);
    CHECK(pi_phi(f, 1e-3) > pi_phi(f, 1e-2));
    for (double phi : {0.05, 0.5, 3.0, 30.0}) {
      CHECK(pi_phi(f, phi) == doctest::Approx(phi_marginal_nested(f, phi)).epsilon(1e-8));
    }
  }
  CHECK_THROWS_AS(phi_marginal(PriorFamily::HTHS, std::nan("")), DomainError);
}

TEST_CASE("phi marginal integrates to one") {
  // integral of pi(phi) d phi = 2 * integral over s = log|phi| of pi(e^s) e^s
  for (PriorFamily f : kFour) {
    QuadratureSpec spec;
    spec.lower = -QuadratureSpec::infinity;
    spec.upper = QuadratureSpec::infinity;
    spec.relative_tolerance = 1e-9;
    spec.breakpoints = {-5.0, 0.0, 5.0};
    const double total =
        2.0 * integrate([&](double s) { return std::exp(log_phi_marginal_at_log(f, s) + s); }, spec);
    CAPTURE(family_label(f));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("phi marginal tail and spike orderings") {
  // HTHS overtakes HS+ only between 50 and 80
  for (double phi : {10.0, 20.0, 50.0}) {
    CHECK(pi_phi(PriorFamily::HTHS, phi) < pi_phi(PriorFamily::HSPlus, phi));
  }
  for (double phi : {10.0, 20.0, 50.0, 100.0, 1e3, 1e4}) {
    CAPTURE(phi);
    if (phi >= 80.0) CHECK(pi_phi(PriorFamily::HTHS, phi) > pi_phi(PriorFamily::HSPlus, phi));
    CHECK(pi_phi(PriorFamily::HSPlus, phi) > pi_phi(PriorFamily::HS, phi));
  }
  // the HTHS+ spike passes HS+ between 0.05 and 0.01
  CHECK(pi_phi(PriorFamily::HTHSPlus, 0.05) < pi_phi(PriorFamily::HSPlus, 0.05));
  for (double phi : {0.01, 1e-3, 1e-4}) {
    CHECK(pi_phi(PriorFamily::HTHSPlus, phi) > pi_phi(PriorFamily::HSPlus, phi));
  }
  // reference values from independent quadrature
  CHECK(pi_phi(PriorFamily::HTHS, 10.0) == doctest::Approx(0.00268249).epsilon(1e-5));
  CHECK(pi_phi(PriorFamily::HTHS, 100.0) == doctest::Approx(9.1265e-5).epsilon(1e-4));
  CHECK(pi_phi(PriorFamily::HSPlus, 10.0) == doctest::Approx(0.0036876780212612504).epsilon(1e-9));
  CHECK(pi_phi(PriorFamily::HSPlus, 0.01) == doctest::Approx(1.9240181988516392).epsilon(1e-9));
  CHECK(pi_phi(PriorFamily::HTHSPlus, 0.01) == doctest::Approx(2.053079394666253).epsilon(1e-9));
  // approach to the 1 / (|phi| log^2 |phi|) rate
  std::vector<double> scaled;
  for (double phi : {50.0, 100.0, 200.0}) {
    const double l = std::log(phi);
    scaled.push_back(pi_phi(PriorFamily::HTHS, phi) * phi * l * l);
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  CHECK((*hi - *lo) / *lo < 0.15);
  // far outside double range in phi, still finite in log form
  const double s = 600.0;
  CHECK(log_phi_marginal_at_log(PriorFamily::HTHS, s) ==
        doctest::Approx(-s - 2.0 * std::log(s)).epsilon(0.02));
}

TEST_CASE("marginal likelihood: evenness, value at 0, tail ratios") {
  for (PriorFamily f : kFour) {
    CAPTURE(family_label(f));
    CHECK(marginal_likelihood(f, 5.0) == doctest::Approx(marginal_likelihood(f, -5.0)).epsilon(1e-10));
    // continuity across the switch between the two integration forms
    CHECK(marginal_likelihood(f, 1.0) == doctest::Approx(marginal_likelihood(f, std::nextafter(1.0, 2.0))).epsilon(1e-10));
    // Tweedie: E[phi | y] = y + d/dy log m(y)
    for (double y : {0.5, 3.0, 8.0}) {
      const double score = log_predictive_score(f, std::vector<double>{y})[0];
      CHECK(posterior_shrinkage(f, y).mean_phi == doctest::Approx(y + score).epsilon(1e-7));
    }
  }
  // m(0) for HS: integral of N(0 | 0, 1 + 1/gamma) pi(gamma)
  auto ratio = [](PriorFamily f, double y) { return marginal_likelihood(f, 2 * y) / marginal_likelihood(f, y); };
  CHECK(ratio(PriorFamily::HS, 40.0) == doctest::Approx(0.25).epsilon(0.2));
  CHECK(ratio(PriorFamily::HSPlus, 40.0) == doctest::Approx(0.25).epsilon(0.2));
  CHECK(ratio(PriorFamily::HTHSPlus, 40.0) == doctest::Approx(0.5).epsilon(0.2));
  // HTHS: ratio rises toward 1/2 only slowly (slowly varying factor)
  CHECK(ratio(PriorFamily::HTHS, 20.0) < ratio(PriorFamily::HTHS, 40.0));
  CHECK(ratio(PriorFamily::HTHS, 40.0) < ratio(PriorFamily::HTHS, 80.0));
  CHECK(ratio(PriorFamily::HTHS, 80.0) < 0.5);
  CHECK(ratio(PriorFamily::HTHS, 40.0) == doctest::Approx(0.374).epsilon(0.01));
  CHECK_THROWS_AS(marginal_likelihood(PriorFamily::HTHS, std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("log predictive score") {
  const std::vector<double> ys = {-100.0, -50.0, -3.0, 3.0, 50.0, 100.0};
  for (PriorFamily f : kFour) {
    const auto sc = log_predictive_score(f, ys);
    CAPTURE(family_label(f));
    for (std::size_t k = 0; k < 3; ++k) CHECK(sc[k] == doctest::Approx(-sc[5 - k]).epsilon(1e-8));
  }
  const auto hs = log_predictive_score(PriorFamily::HS, std::vector<double>{100.0});
  CHECK(100.0 * std::fabs(hs[0]) == doctest::Approx(2.0).epsilon(0.05));
  // HTHS |y| score decreases toward 1 from above
  const auto hths = log_predictive_score(PriorFamily::HTHS, std::vector<double>{50.0, 100.0, 1e4});
  CHECK(50.0 * std::fabs(hths[0]) > 100.0 * std::fabs(hths[1]));
  CHECK(1e4 * std::fabs(hths[2]) < 100.0 * std::fabs(hths[1]));
  CHECK(1e4 * std::fabs(hths[2]) > 1.0);
}

TEST_CASE("incomplete gamma sandwich bound") {
  CHECK(theorem2_bound(0.25, 2.0) == doctest::Approx(theorem2_bound(0.25, -2.0)).epsilon(1e-12));
  CHECK(theorem2_bound(1e-6, 2.0) < 1e-5);
  CHECK(theorem2_bound(2e-6, 2.0) == doctest::Approx(2.0 * theorem2_bound(1e-6, 2.0)).epsilon(1e-4));
  // direct evaluation of the expression at a = 0.25, phi = 1 with
  // Gamma_L(3/4, 1/2) and Gamma_U(1/4, 1/2) from quadrature
  QuadratureSpec spec;
  spec.lower = 0.0;
  spec.upper = 0.5;
  const double gl = integrate([](double t) { return t == 0.0 ? 0.0 : std::pow(t, -0.25) * std::exp(-t); }, spec);
  spec.lower = 0.5;
  spec.upper = QuadratureSpec::infinity;
  const double gu = integrate([](double t) { return std::pow(t, -0.75) * std::exp(-t); }, spec);
  const double expected = (0.25 * std::pow(2.0, -0.75) * gl + 0.25 * std::pow(2.0, -1.25) * gu) / std::sqrt(std::numbers::pi);
  CHECK(theorem2_bound(0.25, 1.0) == doctest::Approx(expected).epsilon(1e-9));
  for (double a : {0.1, 0.25, 0.4}) {
    for (double phi : {0.1, 1.0, 20.0}) {
      CHECK(theorem2_bound(a, phi) > 0.0);
      CHECK(std::isfinite(theorem2_bound(a, phi)));
    }
  }
  // ratios against HS+ and HTHS+ stay bounded on [0.1, 20]
  for (double a : {0.1, 0.25, 0.4}) {
    double worst = 0.0;
    for (double phi = 0.1; phi <= 20.0; phi *= 1.25) {
      const double b = theorem2_bound(a, phi);
      worst = std::max({worst, b / pi_phi(PriorFamily::HSPlus, phi), pi_phi(PriorFamily::HTHSPlus, phi) / b});
    }
    CAPTURE(a);
    CHECK(worst < 1e6);
  }
  CHECK_THROWS_AS(theorem2_bound(0.5, 1.0), DomainError);
  CHECK_THROWS_AS(theorem2_bound(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(theorem2_bound(0.2, 0.0), DomainError);
}

TEST_CASE("KL risk bound") {
  const auto r = kl_risk_bound(PriorFamily::HTHS, 0.0, 100);
  CHECK(r.half_width == doctest::Approx(0.1414213562373095).epsilon(1e-15));
  CHECK(r.epsilon == 0.01);
  CHECK(r.bound == doctest::Approx(r.epsilon - std::log(r.mass) / 100.0));
  // Fubini route against integrating the phi marginal over the interval
  for (PriorFamily f : kFour) {
    QuadratureSpec spec;
    spec.lower = 1.0 - r.half_width;
    spec.upper = 1.0 + r.half_width;
    spec.relative_tolerance = 1e-11;
    const double nested = integrate([&](double phi) { return pi_phi(f, phi); }, spec);
    CHECK(phi_interval_mass(f, 1.0, r.half_width) == doctest::Approx(nested).epsilon(1e-9));
    // at the origin: split at the asymptote, work in log|phi|
    spec.lower = -QuadratureSpec::infinity;
    spec.upper = std::log(r.half_width);
    const double at_zero = 2.0 * integrate([&](double s) { return std::exp(log_phi_marginal_at_log(f, s) + s); }, spec);
    CHECK(phi_interval_mass(f, 0.0, r.half_width) == doctest::Approx(at_zero).epsilon(1e-8));
  }
  for (std::size_t n : {100u, 1000u, 10000u}) {
    CAPTURE(n);
    CHECK(kl_risk_bound(PriorFamily::HTHS, 0.0, n).bound < kl_risk_bound(PriorFamily::HS, 0.0, n).bound);
    CHECK(kl_risk_bound(PriorFamily::HTHSPlus, 0.0, n).bound < kl_risk_bound(PriorFamily::HSPlus, 0.0, n).bound);
  }
  for (PriorFamily f : kFour) {
    CHECK(kl_risk_bound(f, 0.0, 10000).bound < kl_risk_bound(f, 0.0, 100).bound);
  }
  for (std::size_t n : {1000u, 10000u, 100000u, 1000000u}) {
    CHECK(kl_risk_bound(PriorFamily::HTHS, 0.0, n).bound * n / std::log(static_cast<double>(n)) < 0.5);
  }
  CHECK_THROWS_AS(kl_risk_bound(PriorFamily::HS, 0.0, 0), DomainError);
  // far from the prior's bulk the neighbourhood mass underflows
  CHECK_THROWS_AS(kl_risk_bound(PriorFamily::HS, 1e300, 1'000'000), UnderflowError);
}

TEST_CASE("grids and figure CSV") {
  const auto g = symmetric_log_grid(1e-2, 1e2, 5);
  REQUIRE(g.size() == 10);
  CHECK(g.front() == -1e2);
  CHECK(g[4] == -1e-2);
  CHECK(g[5] == 1e-2);
  CHECK(g.back() == 1e2);
  CHECK(g[7] == doctest::Approx(1.0));
  const auto n = log_count_grid(10, 1'000'000, 6);
  CHECK(n == std::vector<std::size_t>{10, 100, 1000, 10000, 100000, 1000000});

  std::ostringstream out;
  const std::vector<FigureRow> rows = {{"HTHS", 0.1, 1.0 / 3.0, "phi"}, {"HS", -2.0, 1e-300, "phi"}};
  write_figure_csv(out, rows);
  CHECK(out.str() == "family,x,value,curve\nHTHS,0.1,0.3333333333333333,phi\nHS,-2,1e-300,phi\n");
  CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("HTHS_lambda through the beta-prime mixture") {
  // the mixture with the uniform decision prior reproduces the closed form
  for (double u : {-1e4, -30.0, -1.0, 0.0, 2.5, 40.0}) {
    CAPTURE(u);
    CHECK(log_density_log_gamma_mixture(PriorFamily::HTHS, u) ==
          doctest::Approx(log_prior_density_log_gamma(PriorFamily::HTHS, u)).epsilon(1e-11));
  }
  // independent quadrature of the E1 closed form of the p prior
  CHECK(log_density_log_gamma_mixture(PriorFamily::HTHSLambda, 0.0) == doctest::Approx(-2.684557536).epsilon(1e-9));
  CHECK(log_density_log_gamma_mixture(PriorFamily::HTHSLambda, -30.0) == doctest::Approx(-6.688950471).epsilon(1e-9));
  CHECK(log_density_log_gamma_mixture(PriorFamily::HTHSLambda, 30.0) == doctest::Approx(-6.208878425).epsilon(1e-9));
  CHECK_THROWS_AS(log_density_log_gamma_mixture(PriorFamily::HS, 0.0), UnsupportedFamilyError);

  const auto f = PriorFamily::HTHSLambda;
  CHECK(prior_density_gamma(f, 1.0) == doctest::Approx(std::exp(-2.684557536)).epsilon(1e-9));
  CHECK(pi_phi(f, 1.0) == doctest::Approx(pi_phi(f, -1.0)).epsilon(1e-12));
  CHECK(pi_phi(f, 1.0) > 0.0);
  CHECK(marginal_likelihood(f, 3.0) == doctest::Approx(marginal_likelihood(f, -3.0)).epsilon(1e-12));
  const auto sc = log_predictive_score(f, std::vector<double>{-50.0, 50.0});
  CHECK(std::isfinite(sc[1]));
  CHECK(sc[0] == doctest::Approx(-sc[1]).epsilon(1e-8));
  CHECK(sc[1] < 0.0);
}
