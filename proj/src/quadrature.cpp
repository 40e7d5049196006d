#include "hths/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>

#include "hths/error.hpp"

namespace hths {
namespace {

constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980223048, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Weights of the embedded 10-point Gauss rule at kKronrodNodes[1, 3, 5, 7, 9].
constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651146};

constexpr double kEpsilon = 2.220446049250313e-16;

// Maps the integration variable t onto the original x and returns f(x) dx/dt.
class Transformed {
 public:
  Transformed(const std::function<double(double)>& f, const QuadratureSpec& spec) : f_(f), spec_(spec) {
    const bool lo_inf = std::isinf(spec.lower);
    const bool hi_inf = std::isinf(spec.upper);
    if (spec.substitution == Substitution::logit) {
      kind_ = Kind::logit;
    } else if (lo_inf && hi_inf) {
      kind_ = Kind::whole_line;
    } else if (hi_inf) {
      kind_ = Kind::upper_infinite;
    } else if (lo_inf) {
      kind_ = Kind::lower_infinite;
    } else {
      kind_ = Kind::finite;
    }
  }

  // Range of t covering the domain.
  std::pair<double, double> t_range() const {
    switch (kind_) {
      case Kind::finite: return {spec_.lower, spec_.upper};
      case Kind::upper_infinite:
      case Kind::lower_infinite: return {0.0, 1.0};
      case Kind::whole_line: return {-1.0, 1.0};
      case Kind::logit: return {-logit_span, logit_span};
    }
    return {0.0, 0.0};
  }

  double to_t(double x) const {
    switch (kind_) {
      case Kind::finite: return x;
      case Kind::upper_infinite: {
        const double d = x - spec_.lower;
        return d / (1.0 + d);
      }
      case Kind::lower_infinite: {
        const double d = spec_.upper - x;
        return 1.0 - d / (1.0 + d);
      }
      case Kind::whole_line: {
        if (x == 0.0) return 0.0;
        // inverse of x = t / (1 - t^2)
        return 2.0 * x / (1.0 + std::sqrt(1.0 + 4.0 * x * x));
      }
      case Kind::logit: {
        const double u = (x - spec_.lower) / (spec_.upper - spec_.lower);
        return std::log(u) - std::log1p(-u);
      }
    }
    return 0.0;
  }

  double operator()(double t) const {
    double x = 0.0;
    double jacobian = 1.0;
    switch (kind_) {
      case Kind::finite:
        x = t;
        break;
      case Kind::upper_infinite: {
        const double r = 1.0 / (1.0 - t);
        x = spec_.lower + t * r;
        jacobian = r * r;
        break;
      }
      case Kind::lower_infinite: {
        const double s = 1.0 - t;
        const double r = 1.0 / t;
        x = spec_.upper - s * r;
        jacobian = r * r;
        break;
      }
      case Kind::whole_line: {
        const double d = 1.0 - t * t;
        x = t / d;
        jacobian = (1.0 + t * t) / (d * d);
        break;
      }
      case Kind::logit: {
        const double u = 1.0 / (1.0 + std::exp(-t));
        const double v = 1.0 / (1.0 + std::exp(t));
        const double width = spec_.upper - spec_.lower;
        x = u <= 0.5 ? spec_.lower + width * u : spec_.upper - width * v;
        jacobian = width * u * v;
        // the node rounded onto an endpoint: its weight is below double spacing
        if (x <= spec_.lower || x >= spec_.upper) return 0.0;
        break;
      }
    }
    if (jacobian == 0.0 || std::isinf(x)) return 0.0;
    const double fx = f_(x);
    if (std::isnan(fx)) {
      throw NumericError("integrand produced NaN at x = " + std::to_string(x));
    }
    if (std::isinf(fx)) {
      throw NumericError("integrand is infinite at interior point x = " + std::to_string(x));
    }
    return fx * jacobian;
  }

  // |s| beyond this contributes below double resolution for any integrand
  // whose singularities are integrable.
  static constexpr double logit_span = 745.0;

 private:
  enum class Kind { finite, upper_infinite, lower_infinite, whole_line, logit };
  const std::function<double(double)>& f_;
  const QuadratureSpec& spec_;
  Kind kind_ = Kind::finite;
};

struct Panel {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;

  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel kronrod21(const Transformed& g, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f_center = g(center);
  double result_gauss = 0.0;
  double result_kronrod = f_center * kKronrodWeights[10];
  double result_abs = std::fabs(result_kronrod);
  std::array<double, 10> f_left{};
  std::array<double, 10> f_right{};
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double f1 = g(center - dx);
    const double f2 = g(center + dx);
    f_left[j] = f1;
    f_right[j] = f2;
    result_kronrod += kKronrodWeights[j] * (f1 + f2);
    result_abs += kKronrodWeights[j] * (std::fabs(f1) + std::fabs(f2));
    if (j % 2 == 1) result_gauss += kGaussWeights[j / 2] * (f1 + f2);
  }
  const double mean = 0.5 * result_kronrod;
  double result_asc = kKronrodWeights[10] * std::fabs(f_center - mean);
  for (std::size_t j = 0; j < 10; ++j) {
    result_asc += kKronrodWeights[j] * (std::fabs(f_left[j] - mean) + std::fabs(f_right[j] - mean));
  }
  const double scale = std::fabs(half);
  result_kronrod *= half;
  result_gauss *= half;
  result_abs *= scale;
  result_asc *= scale;

  double error = std::fabs(result_kronrod - result_gauss);
  if (result_asc != 0.0 && error != 0.0) {
    error = result_asc * std::min(1.0, std::pow(200.0 * error / result_asc, 1.5));
  }
  if (result_abs > std::numeric_limits<double>::min() / (50.0 * kEpsilon)) {
    error = std::max(50.0 * kEpsilon * result_abs, error);
  }
  return {a, b, result_kronrod, error};
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(relative_tolerance > 0.0) || !(absolute_tolerance > 0.0)) {
    throw DomainError("quadrature tolerances must be strictly positive");
  }
  if (max_subdivisions < 1) throw DomainError("quadrature max_subdivisions must be at least 1");
  if (std::isnan(lower) || std::isnan(upper) || !(lower < upper)) {
    throw DomainError("quadrature domain must satisfy lower < upper");
  }
  if (substitution == Substitution::logit && (std::isinf(lower) || std::isinf(upper))) {
    throw DomainError("logit substitution requires a finite interval");
  }
}

QuadratureResult integrate_detailed(const std::function<double(double)>& f, const QuadratureSpec& spec) {
  spec.validate();
  const Transformed g(f, spec);
  const auto [t0, t1] = g.t_range();

  std::vector<double> cuts{t0};
  {
    std::vector<double> interior;
    for (double x : spec.breakpoints) {
      if (x > spec.lower && x < spec.upper) interior.push_back(g.to_t(x));
    }
    std::sort(interior.begin(), interior.end());
    for (double t : interior) {
      if (t > cuts.back() && t < t1) cuts.push_back(t);
    }
    cuts.push_back(t1);
  }

  QuadratureResult result;
  std::priority_queue<Panel> active;
  std::vector<Panel> frozen;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    active.push(kronrod21(g, cuts[i], cuts[i + 1]));
    result.evaluations += 21;
  }

  auto totals = [&]() {
    double value = 0.0;
    double error = 0.0;
    auto copy = active;
    while (!copy.empty()) {
      value += copy.top().value;
      error += copy.top().error;
      copy.pop();
    }
    for (const auto& p : frozen) {
      value += p.value;
      error += p.error;
    }
    return std::pair{value, error};
  };

  double value = 0.0;
  double error = 0.0;
  {
    auto copy = active;
    while (!copy.empty()) {
      value += copy.top().value;
      error += copy.top().error;
      copy.pop();
    }
  }

  auto tolerance = [&](double v) { return std::max(spec.absolute_tolerance, spec.relative_tolerance * std::fabs(v)); };

  while (error > tolerance(value)) {
    if (active.empty() || result.subdivisions >= spec.max_subdivisions) {
      std::tie(value, error) = totals();
      if (error <= tolerance(value)) break;
      throw ConvergenceError("adaptive quadrature did not reach tolerance after " +
                                 std::to_string(result.subdivisions) + " subdivisions (estimate " +
                                 std::to_string(value) + ", error " + std::to_string(error) + ")",
                             value, error);
    }
    const Panel worst = active.top();
    active.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      frozen.push_back(worst);
      continue;
    }
    const Panel left = kronrod21(g, worst.a, mid);
    const Panel right = kronrod21(g, mid, worst.b);
    result.evaluations += 42;
    ++result.subdivisions;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    active.push(left);
    active.push(right);
    // Periodic resummation limits drift from the incremental updates.
    if (result.subdivisions % 64 == 0) std::tie(value, error) = totals();
  }
  std::tie(value, error) = totals();
  result.value = value;
  result.error = error;
  return result;
}

double integrate(const std::function<double(double)>& f, const QuadratureSpec& spec) {
  return integrate_detailed(f, spec).value;
}

}  // namespace hths
