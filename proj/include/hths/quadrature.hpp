#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace hths {

enum class Substitution {
  // Identity on finite intervals; x = a + t/(1-t) style maps on infinite ones.
  automatic,
  // x = a + (b - a) * logistic(s) over s in R; finite intervals only. Suited to
  // integrands with asymptotes at both endpoints. x near b is limited by double
  // spacing there; integrands with mass within ~1e-16 of b should be written
  // in the logit variable directly.
  logit,
};

struct QuadratureSpec {
  double lower = 0.0;
  double upper = 1.0;
  double relative_tolerance = 1e-10;
  double absolute_tolerance = 1e-12;
  std::size_t max_subdivisions = 2000;
  // Interior points (in the original variable) where the integrand changes
  // scale; the initial partition is split there.
  std::vector<double> breakpoints{};
  Substitution substitution = Substitution::automatic;

  static constexpr double infinity = std::numeric_limits<double>::infinity();

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t subdivisions = 0;
  std::size_t evaluations = 0;
};

// Globally adaptive 21-point Gauss-Kronrod integration. Throws
// ConvergenceError when the tolerance is not met within max_subdivisions and
// NumericError when f returns NaN.
QuadratureResult integrate_detailed(const std::function<double(double)>& f, const QuadratureSpec& spec);

double integrate(const std::function<double(double)>& f, const QuadratureSpec& spec);

// Polynomial exactness degree of the Kronrod rule used on each panel.
inline constexpr int kKronrodExactnessDegree = 31;

}  // namespace hths
