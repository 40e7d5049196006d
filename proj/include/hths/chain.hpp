#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hths/densities.hpp"
#include "hths/draw_store.hpp"
#include "hths/kernels.hpp"
#include "hths/model.hpp"

namespace hths {

struct ParameterSummary {
  std::string name;
  double median = 0.0;  // lower median for even counts
  double lower = 0.0;   // 2.5% quantile
  double upper = 0.0;   // 97.5% quantile
  double mean = 0.0;
};

struct PosteriorSummary {
  std::size_t retained = 0;
  std::vector<ParameterSummary> parameters;  // one per draw-store column
  std::vector<double> phi_ess;               // effective sample size of each phi_i
  SweepCounters counters;

  const ParameterSummary& parameter(const std::string& name) const;
  std::vector<double> phi_medians() const;
};

struct ChainResult {
  DrawStore draws;
  PosteriorSummary summary;
};

// Columns: mu, sigma2, z, phi[i], then gamma[i] and (HTHS families) p[i]
// when local scales are retained.
ChainResult run_chain(std::span<const double> y, PriorFamily family, const GlobalPriors& priors,
                      const ChainConfig& config);

// Empirical quantile at order statistic floor((m - 1) q) of the sorted sample.
double order_quantile(std::span<const double> sample, double q);

// Geyer initial-monotone-sequence estimate, capped at the sample size.
double effective_sample_size(std::span<const double> chain);

PosteriorSummary summarize(const DrawStore& draws, std::size_t n);

struct ShrinkageEstimate {
  std::vector<double> mean_tau;       // Rao-Blackwell E[tau_i | y]
  std::vector<double> mean_tau_se;    // Monte Carlo standard error
  std::vector<double> identity_mean;  // (1 - E[tau_i | y]) y_i
  std::vector<double> identity_se;
  std::vector<double> direct_mean;    // average of the phi_i draws
  std::vector<double> direct_se;
};

// Averages tau over the retained draws. Standard errors use the Geyer
// effective sample size of the one chain; for the log-Cauchy families with
// short chains they can come out well below the spread between independent
// chains, which is the safer measure. The store must come from a chain with
// globals pinned at mu = 0, sigma2 = 1, Z = 1 and retained gamma columns;
// anything else throws std::invalid_argument.
ShrinkageEstimate rao_blackwell_shrinkage(const DrawStore& draws, std::span<const double> y);

}  // namespace hths
