#include "hths/chain.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "hths/error.hpp"
#include "hths/random.hpp"
#include "hths/serialization.hpp"

namespace hths {

namespace {

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Autocorrelation at lags 0..m-1 by zero-padded FFT.
std::vector<double> autocorrelation(std::span<const double> x) {
  const std::size_t m = x.size();
  std::size_t size = 1;
  while (size < 2 * m) size <<= 1;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(m);

  std::vector<double> buffer(size, 0.0);
  for (std::size_t i = 0; i < m; ++i) buffer[i] = x[i] - mean;
  std::vector<std::complex<double>> spectrum(size / 2 + 1);
  auto* spec = reinterpret_cast<fftw_complex*>(spectrum.data());

  fftw_plan forward, backward;
  {
    std::lock_guard lock(fftw_planner_mutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(size), buffer.data(), spec, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(size), spec, buffer.data(), FFTW_ESTIMATE);
  }
  fftw_execute(forward);
  for (auto& c : spectrum) c = std::norm(c);
  fftw_execute(backward);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }

  std::vector<double> rho(m, 0.0);
  if (!(buffer[0] > 0.0)) return rho;
  for (std::size_t k = 0; k < m; ++k) rho[k] = buffer[k] / buffer[0];
  return rho;
}

std::vector<std::string> column_names(PriorFamily family, std::size_t n, bool retain_local) {
  std::vector<std::string> names = {"mu", "sigma2", "z"};
  for (std::size_t i = 0; i < n; ++i) names.push_back("phi[" + std::to_string(i) + "]");
  if (retain_local) {
    for (std::size_t i = 0; i < n; ++i) names.push_back("gamma[" + std::to_string(i) + "]");
    if (has_decision_parameter(family)) {
      for (std::size_t i = 0; i < n; ++i) names.push_back("p[" + std::to_string(i) + "]");
    }
  }
  return names;
}

}  // namespace

const ParameterSummary& PosteriorSummary::parameter(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("no summary for '" + name + "'");
}

std::vector<double> PosteriorSummary::phi_medians() const {
  std::vector<double> out;
  for (const auto& p : parameters) {
    if (p.name.starts_with("phi[")) out.push_back(p.median);
  }
  return out;
}

double order_quantile(std::span<const double> sample, double q) {
  if (sample.empty()) throw DomainError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile order outside [0, 1]");
  std::vector<double> sorted(sample.begin(), sample.end());
  const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(sorted.size() - 1) * q));
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
  return sorted[k];
}

double effective_sample_size(std::span<const double> chain) {
  const std::size_t m = chain.size();
  if (m < 4) return static_cast<double>(m);
  const auto rho = autocorrelation(chain);
  if (rho[0] == 0.0) return static_cast<double>(m);  // constant chain
  double tau = -1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < m; k += 2) {
    double pair = rho[k] + rho[k + 1];
    if (pair <= 0.0) break;
    pair = std::min(pair, previous);
    tau += 2.0 * pair;
    previous = pair;
  }
  const double ess = static_cast<double>(m) / std::max(tau, 1e-12);
  return std::min(ess, static_cast<double>(m));
}

PosteriorSummary summarize(const DrawStore& draws, std::size_t n) {
  PosteriorSummary s;
  s.retained = draws.draws();
  for (std::size_t j = 0; j < draws.columns(); ++j) {
    const auto col = draws.column(j);
    std::vector<double> sorted(col.begin(), col.end());
    std::sort(sorted.begin(), sorted.end());
    auto at = [&](double q) {
      return sorted[static_cast<std::size_t>(std::floor(static_cast<double>(sorted.size() - 1) * q))];
    };
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(col.size());
    s.parameters.push_back({draws.names()[j], at(0.5), at(0.025), at(0.975), mean});
  }
  for (std::size_t i = 0; i < n; ++i) {
    s.phi_ess.push_back(effective_sample_size(draws.column("phi[" + std::to_string(i) + "]")));
  }
  return s;
}

ChainResult run_chain(std::span<const double> y, PriorFamily family, const GlobalPriors& priors,
                      const ChainConfig& config) {
  if (y.empty()) throw DomainError("run_chain needs at least one observation");
  priors.validate();
  config.validate();
  for (double v : y) {
    if (!std::isfinite(v)) throw DomainError("observations must be finite");
  }
  const std::size_t n = y.size();
  const std::size_t retained = config.retained();

  nlohmann::json metadata = {{"family", std::string(family_label(family))},
                             {"n", n},
                             {"seed", config.seed},
                             {"config", config},
                             {"priors", priors}};
  DrawStore store(column_names(family, n, config.retain_local_scales), retained, std::move(metadata));

  SamplerSettings settings;
  settings.family = family;
  settings.priors = priors;
  settings.fixed_globals = config.fixed_globals;
  settings.slice_width = config.slice_width;

  RandomStream rng(config.seed);
  ModelState state = ModelState::initial(y, family, config.fixed_globals);
  SweepCounters counters;

  std::size_t row = 0;
  for (std::size_t it = 0; it < config.iterations; ++it) {
    try {
      gibbs_sweep(state, y, settings, rng, &counters);
    } catch (const DivergedChainError& e) {
      throw DivergedChainError(std::string(e.what()) + " at iteration " + std::to_string(it), it);
    }
    if (it < config.burn_in || (it - config.burn_in + 1) % config.thinning != 0 || row >= retained) continue;
    std::size_t j = 0;
    store.column(j++)[row] = state.mu;
    store.column(j++)[row] = state.sigma2;
    store.column(j++)[row] = state.z;
    for (double v : state.phi) store.column(j++)[row] = v;
    if (config.retain_local_scales) {
      for (double v : state.gamma) store.column(j++)[row] = v;
      if (has_decision_parameter(family)) {
        for (double v : state.p) store.column(j++)[row] = v;
      }
    }
    ++row;
  }

  PosteriorSummary summary = summarize(store, n);
  summary.counters = counters;
  return {std::move(store), std::move(summary)};
}

ShrinkageEstimate rao_blackwell_shrinkage(const DrawStore& draws, std::span<const double> y) {
  const auto& meta = draws.metadata();
  const auto config = meta.contains("config") ? meta["config"].get<ChainConfig>() : ChainConfig{};
  const bool pinned = config.fixed_globals && config.fixed_globals->mu == 0.0 &&
                      config.fixed_globals->sigma2 == 1.0 && config.fixed_globals->z == 1.0;
  if (!pinned) {
    throw std::invalid_argument("shrinkage identity needs globals pinned at mu = 0, sigma2 = 1, Z = 1");
  }
  const std::size_t n = meta.value("n", std::size_t{0});
  if (n != y.size()) throw std::invalid_argument("data length does not match the draw store");
  if (draws.draws() == 0) throw std::invalid_argument("draw store is empty");

  auto mean_and_se = [](const std::vector<double>& x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size() > 1 ? x.size() - 1 : 1);
    return std::pair{mean, std::sqrt(var / effective_sample_size(x))};
  };

  ShrinkageEstimate out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string idx = "[" + std::to_string(i) + "]";
    if (!draws.has("gamma" + idx)) throw std::invalid_argument("draw store does not retain gamma");
    const auto gamma = draws.column("gamma" + idx);
    std::vector<double> tau(gamma.size());
    std::transform(gamma.begin(), gamma.end(), tau.begin(), [](double g) { return g / (1.0 + g); });
    const auto [t, t_se] = mean_and_se(tau);
    const auto phi = draws.column("phi" + idx);
    const auto [f, f_se] = mean_and_se(std::vector<double>(phi.begin(), phi.end()));
    out.mean_tau.push_back(t);
    out.mean_tau_se.push_back(t_se);
    out.identity_mean.push_back((1.0 - t) * y[i]);
    out.identity_se.push_back(t_se * std::fabs(y[i]));
    out.direct_mean.push_back(f);
    out.direct_se.push_back(f_se);
  }
  return out;
}

}  // namespace hths
