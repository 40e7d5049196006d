#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hths/densities.hpp"
#include "hths/model.hpp"
#include "hths/random.hpp"
#include "json.hpp"

namespace hths {

// One row of the comparison: the least-squares baseline (no family) or a
// Bayesian model fitted by run_chain.
struct ModelSpec {
  std::string label;
  std::optional<PriorFamily> family;
};

// MLE, HS, HS+, HTHS, HTHS+, HTHS_lambda.
std::vector<ModelSpec> default_models();

struct SimulationDesign {
  std::size_t n = 400;
  std::vector<double> etas = {0.2, 0.05, 0.01};
  double mu_true = 0.0;
  std::size_t replicates = 5;
  std::uint64_t seed = 1;
  ChainConfig chain = desk_chain();
  GlobalPriors priors{};
  std::vector<ModelSpec> models = default_models();
  std::size_t threads = 0;  // 0: one per hardware thread

  // 1,000 burn-in, 2,000 retained, thinning 2.
  static ChainConfig desk_chain();
  // 20 replicates and the default ChainConfig (5,000 burn-in, 10,000 retained,
  // thinning 5).
  static SimulationDesign paper_scale();
  void validate() const;
};

struct SimulatedData {
  std::vector<double> y;
  std::vector<double> phi_true;
};

// phi_i = 0 with probability 1 - eta, else Uniform(4, 6) or Uniform(-6, -4)
// with equal odds; y_i = mu_true + phi_i + N(0, 1).
SimulatedData generate_data(std::size_t n, double eta, double mu_true, RandomStream& rng);

// y_i - mu_true where phi_i != 0, else 0.
std::vector<double> oracle_estimate(const std::vector<double>& y, const std::vector<double>& phi_true,
                                    double mu_true);

struct ReplicateRow {
  double eta = 0.0;
  std::size_t replicate = 0;
  std::string model;
  std::uint64_t seed = 0;  // chain seed (data seed for the MLE row)
  double mae = 0.0;        // sum_i |phi_hat_i - phi_i|
  double ora = 0.0;        // sum_i |phi_hat_i - oracle_i|
  double oracle_error = 0.0;  // sum_i |oracle_i - phi_i|
  bool failed = false;
  std::string error;
};

struct CellSummary {
  std::string model;
  double eta = 0.0;
  std::size_t completed = 0;
  std::size_t failed = 0;
  double mae_mean = 0.0;
  double mae_se = 0.0;
  double ora_mean = 0.0;
  double ora_se = 0.0;
};

struct SimulationReport {
  SimulationDesign design;
  std::vector<ReplicateRow> rows;   // ordered by (eta, replicate, model)
  std::vector<CellSummary> cells;   // ordered by (model, eta)
  double seconds = 0.0;             // wall time; not part of the JSON payload

  const CellSummary& cell(const std::string& model, double eta) const;
  nlohmann::json to_json() const;
  // Models as rows; for each eta an M.A.E. and an Ora. column.
  std::string text_table() const;
};

// Fits every model to every replicate. Chains run on a worker pool; results
// are reduced in a fixed order so the report does not depend on scheduling.
// A diverged chain marks its row failed and is excluded from the cell means.
SimulationReport evaluate_models(const SimulationDesign& design);

nlohmann::json design_to_json(const SimulationDesign& design);
SimulationDesign design_from_json(const nlohmann::json& j);

}  // namespace hths
