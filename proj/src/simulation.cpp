#include "hths/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hths/chain.hpp"
#include "hths/error.hpp"
#include "hths/serialization.hpp"

namespace hths {

std::vector<ModelSpec> default_models() {
  std::vector<ModelSpec> models = {{"MLE", std::nullopt}};
  for (PriorFamily f : kAllFamilies) models.push_back({std::string(family_label(f)), f});
  return models;
}

ChainConfig SimulationDesign::desk_chain() {
  ChainConfig c;
  c.burn_in = 1'000;
  c.thinning = 2;
  c.iterations = 1'000 + 2'000 * 2;
  return c;
}

SimulationDesign SimulationDesign::paper_scale() {
  SimulationDesign d;
  d.replicates = 20;
  d.chain = ChainConfig{};
  return d;
}

void SimulationDesign::validate() const {
  if (n < 1) throw DomainError("simulation needs n >= 1");
  if (replicates < 1) throw DomainError("simulation needs at least one replicate");
  if (etas.empty()) throw DomainError("simulation needs at least one sparsity level");
  for (double eta : etas) {
    if (!(eta > 0.0 && eta < 1.0)) throw DomainError("sparsity level eta must lie in (0, 1)");
  }
  if (!std::isfinite(mu_true)) throw DomainError("mu_true must be finite");
  if (models.empty()) throw DomainError("simulation needs at least one model");
  chain.validate();
  priors.validate();
}

SimulatedData generate_data(std::size_t n, double eta, double mu_true, RandomStream& rng) {
  if (!(eta > 0.0 && eta < 1.0)) throw DomainError("sparsity level eta must lie in (0, 1)");
  SimulatedData d;
  d.y.resize(n);
  d.phi_true.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double branch = rng.uniform();
    double phi = 0.0;
    if (branch < 0.5 * eta) {
      phi = 4.0 + 2.0 * rng.uniform();
    } else if (branch < eta) {
      phi = -4.0 - 2.0 * rng.uniform();
    }
    d.phi_true[i] = phi;
    d.y[i] = mu_true + phi + rng.normal();
  }
  return d;
}

std::vector<double> oracle_estimate(const std::vector<double>& y, const std::vector<double>& phi_true,
                                    double mu_true) {
  if (y.size() != phi_true.size()) throw DomainError("oracle_estimate: length mismatch");
  std::vector<double> out(y.size(), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (phi_true[i] != 0.0) out[i] = y[i] - mu_true;
  }
  return out;
}

namespace {

double total_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

struct Replicate {
  double eta;
  std::size_t eta_index;
  std::size_t index;
  std::uint64_t seed;
  SimulatedData data;
  std::vector<double> oracle;
};

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

SimulationReport evaluate_models(const SimulationDesign& design) {
  design.validate();
  const auto start = std::chrono::steady_clock::now();

  std::vector<Replicate> reps;
  for (std::size_t e = 0; e < design.etas.size(); ++e) {
    for (std::size_t r = 0; r < design.replicates; ++r) {
      const std::uint64_t seed = derive_seed(derive_seed(design.seed, e), r);
      RandomStream rng(derive_seed(seed, 0));
      auto data = generate_data(design.n, design.etas[e], design.mu_true, rng);
      auto oracle = oracle_estimate(data.y, data.phi_true, design.mu_true);
      reps.push_back({design.etas[e], e, r, seed, std::move(data), std::move(oracle)});
    }
  }

  const std::size_t models = design.models.size();
  std::vector<ReplicateRow> rows(reps.size() * models);
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;

  auto work = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= rows.size()) return;
      const Replicate& rep = reps[task / models];
      const std::size_t m = task % models;
      const ModelSpec& spec = design.models[m];
      ReplicateRow& row = rows[task];
      row.eta = rep.eta;
      row.replicate = rep.index;
      row.model = spec.label;
      row.oracle_error = total_abs_diff(rep.oracle, rep.data.phi_true);
      try {
        std::vector<double> estimate(design.n);
        if (!spec.family) {
          row.seed = derive_seed(rep.seed, 0);
          double mean = 0.0;
          for (double v : rep.data.y) mean += v;
          mean /= static_cast<double>(design.n);
          for (std::size_t i = 0; i < design.n; ++i) estimate[i] = rep.data.y[i] - mean;
        } else {
          ChainConfig config = design.chain;
          config.seed = derive_seed(rep.seed, m + 1);
          config.retain_local_scales = false;
          row.seed = config.seed;
          estimate = run_chain(rep.data.y, *spec.family, design.priors, config).summary.phi_medians();
        }
        row.mae = total_abs_diff(estimate, rep.data.phi_true);
        row.ora = total_abs_diff(estimate, rep.oracle);
      } catch (const NumericError& e) {
        row.failed = true;
        row.error = e.what();
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        next.store(rows.size());
        return;
      }
    }
  };

  std::size_t threads = design.threads ? design.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, rows.size());
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  SimulationReport report;
  report.design = design;
  report.rows = std::move(rows);
  for (std::size_t m = 0; m < models; ++m) {
    for (std::size_t e = 0; e < design.etas.size(); ++e) {
      CellSummary cell;
      cell.model = design.models[m].label;
      cell.eta = design.etas[e];
      std::vector<double> mae, ora;
      for (std::size_t r = 0; r < design.replicates; ++r) {
        const auto& row = report.rows[(e * design.replicates + r) * models + m];
        if (row.failed) {
          ++cell.failed;
          continue;
        }
        mae.push_back(row.mae);
        ora.push_back(row.ora);
      }
      cell.completed = mae.size();
      auto mean_se = [](const std::vector<double>& x, double& mean, double& se) {
        mean = 0.0;
        se = 0.0;
        if (x.empty()) return;
        for (double v : x) mean += v;
        mean /= static_cast<double>(x.size());
        if (x.size() < 2) return;
        double ss = 0.0;
        for (double v : x) ss += (v - mean) * (v - mean);
        se = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
      };
      mean_se(mae, cell.mae_mean, cell.mae_se);
      mean_se(ora, cell.ora_mean, cell.ora_se);
      report.cells.push_back(cell);
    }
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

const CellSummary& SimulationReport::cell(const std::string& model, double eta) const {
  for (const auto& c : cells) {
    if (c.model == model && c.eta == eta) return c;
  }
  throw std::out_of_range("no cell for model " + model);
}

nlohmann::json design_to_json(const SimulationDesign& d) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : d.models) models.push_back(m.label);
  return {{"n", d.n},           {"etas", d.etas},     {"mu_true", d.mu_true}, {"replicates", d.replicates},
          {"seed", d.seed},     {"chain", d.chain},   {"priors", d.priors},   {"models", models}};
}

SimulationDesign design_from_json(const nlohmann::json& j) {
  SimulationDesign d;
  d.n = j.value("n", d.n);
  d.etas = j.value("etas", d.etas);
  d.mu_true = j.value("mu_true", d.mu_true);
  d.replicates = j.value("replicates", d.replicates);
  d.seed = j.value("seed", d.seed);
  if (j.contains("chain")) d.chain = j["chain"].get<ChainConfig>();
  if (j.contains("priors")) d.priors = j["priors"].get<GlobalPriors>();
  if (j.contains("models")) {
    d.models.clear();
    for (const auto& label : j["models"]) {
      const auto text = label.get<std::string>();
      if (text == "MLE") {
        d.models.push_back({"MLE", std::nullopt});
      } else {
        const PriorFamily f = parse_family(text);
        d.models.push_back({std::string(family_label(f)), f});
      }
    }
  }
  d.threads = j.value("threads", d.threads);
  return d;
}

nlohmann::json SimulationReport::to_json() const {
  nlohmann::json out;
  out["design"] = design_to_json(design);
  auto& jr = out["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row = {{"eta", r.eta},   {"replicate", r.replicate}, {"model", r.model},
                          {"seed", r.seed}, {"failed", r.failed}};
    if (r.failed) {
      row["error"] = r.error;
    } else {
      row["mae"] = r.mae;
      row["ora"] = r.ora;
    }
    row["oracle_error"] = r.oracle_error;
    jr.push_back(row);
  }
  auto& jc = out["cells"] = nlohmann::json::array();
  for (const auto& c : cells) {
    jc.push_back({{"model", c.model},
                  {"eta", c.eta},
                  {"completed", c.completed},
                  {"failed", c.failed},
                  {"mae_mean", c.mae_mean},
                  {"mae_se", c.mae_se},
                  {"ora_mean", c.ora_mean},
                  {"ora_se", c.ora_se}});
  }
  return out;
}

std::string SimulationReport::text_table() const {
  constexpr int kLabel = 13;
  constexpr int kCol = 9;
  std::ostringstream out;
  auto pad = [](std::string s, int w, bool left) {
    if (static_cast<int>(s.size()) >= w) return s;
    return left ? s + std::string(w - s.size(), ' ') : std::string(w - s.size(), ' ') + s;
  };
  out << pad("", kLabel, true);
  for (double eta : design.etas) out << " |" << pad("eta=" + nlohmann::json(eta).dump(), 2 * kCol, false);
  out << '\n' << pad("", kLabel, true);
  for (std::size_t e = 0; e < design.etas.size(); ++e) out << " |" << pad("M.A.E.", kCol, false) << pad("Ora.", kCol, false);
  out << '\n';
  for (const auto& m : design.models) {
    out << pad(m.label == "MLE" ? "M.L.E." : m.label, kLabel, true);
    for (double eta : design.etas) {
      const auto& c = cell(m.label, eta);
      if (c.completed == 0) {
        out << " |" << pad("failed", kCol, false) << pad("failed", kCol, false);
      } else {
        out << " |" << pad(fixed(c.mae_mean, 1), kCol, false) << pad(fixed(c.ora_mean, 1), kCol, false);
      }
    }
    out << '\n';
  }
  out << "n = " << design.n << "; sums over observations, averaged over " << design.replicates << " replicates";
  std::size_t failed = 0;
  for (const auto& c : cells) failed += c.failed;
  if (failed) out << "; " << failed << " fitted replicate(s) failed and are excluded";
  out << '\n';
  return out.str();
}

}  // namespace hths
