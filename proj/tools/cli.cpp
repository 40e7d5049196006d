#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "hths/chain.hpp"
#include "hths/densities.hpp"
#include "hths/error.hpp"
#include "hths/marginals.hpp"
#include "hths/serialization.hpp"
#include "hths/simulation.hpp"
#include "json.hpp"

namespace hths::cli {
namespace {

using nlohmann::json;

// Bad combination of otherwise well-formed arguments.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Reads a flat JSON object of flag values. Also accepts the outputs of this
// program: a JSON document carrying a "config" object, or CSV/table text
// whose first line is "# {config}".
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App& root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::string text((std::istreambuf_iterator<char>(input)), std::istreambuf_iterator<char>());
    const auto start = text.find_first_not_of(" \t\r\n");
    if (start != std::string::npos && text[start] == '#') {
      const auto eol = text.find('\n', start);
      text = text.substr(start + 1, eol == std::string::npos ? std::string::npos : eol - start - 1);
    }
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw CLI::ConfigError("config is not a JSON object");
    if (j.contains("config")) j = j["config"];
    if (!j.is_object()) throw CLI::ConfigError("\"config\" is not a JSON object");

    const auto subs = root_.get_subcommands();
    if (subs.empty()) return {};
    const std::string command = subs.front()->get_name();
    if (j.contains("command") && j["command"] != command) {
      throw CLI::ConfigError("config was written by '" + j["command"].get<std::string>() + "', not '" + command + "'");
    }

    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (key == "command" || value.is_null()) continue;
      CLI::ConfigItem item;
      item.parents = {command};
      item.name = key;
      auto add = [&](const json& v) { item.inputs.push_back(v.is_string() ? v.get<std::string>() : v.dump()); };
      if (value.is_array()) {
        for (const auto& v : value) add(v);
      } else {
        add(value);
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  const CLI::App& root_;
};

struct Common {
  std::string output;
  std::string format;
  std::uint64_t seed = 1;
};

void add_common(CLI::App& sub, Common& c, const std::string& default_format) {
  c.format = default_format;
  sub.add_option("-o,--output", c.output, "Write results here instead of stdout");
  sub.add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json", "table"}));
  sub.add_option("--seed", c.seed, "Random seed");
}

// The output path is left out so that a rerun from an embedded config
// reproduces the file byte for byte instead of overwriting it.
void put_common(json& config, const Common& c) {
  config["format"] = c.format;
  config["seed"] = c.seed;
}

std::vector<PriorFamily> parse_families(const std::vector<std::string>& names) {
  std::vector<PriorFamily> out;
  for (const auto& name : names) {
    try {
      out.push_back(parse_family(name));
    } catch (const std::exception&) {
      throw UsageError("unknown family '" + name + "'");
    }
  }
  return out;
}

std::vector<std::string> family_names(const std::vector<PriorFamily>& families) {
  std::vector<std::string> out;
  for (auto f : families) out.emplace_back(family_label(f));
  return out;
}

// Grid from --at values or --grid lo,hi,points with the chosen spacing.
std::vector<double> make_grid(const std::vector<double>& at, const std::vector<double>& grid,
                              const std::string& spacing) {
  if (!at.empty() && !grid.empty()) throw UsageError("give either --at or --grid, not both");
  if (!at.empty()) return at;
  if (grid.empty()) throw UsageError("one of --at or --grid is required");
  if (grid.size() != 3) throw UsageError("--grid takes lo,hi,points");
  const double lo = grid[0];
  const double hi = grid[1];
  const double k = grid[2];
  if (!(k >= 1) || k != std::floor(k)) throw UsageError("--grid point count must be a positive integer");
  const auto points = static_cast<std::size_t>(k);
  if (spacing == "symmetric-log") return symmetric_log_grid(lo, hi, points);
  std::vector<double> xs(points);
  if (spacing == "log") {
    if (!(lo > 0 && hi > 0)) throw UsageError("log spacing needs positive endpoints");
    for (std::size_t i = 0; i < points; ++i) {
      xs[i] = points == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (points - 1));
    }
    if (points > 1) xs.back() = hi;
    return xs;
  }
  for (std::size_t i = 0; i < points; ++i) xs[i] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
  if (points > 1) xs.back() = hi;
  return xs;
}

void put_grid(json& config, const std::vector<double>& at, const std::vector<double>& grid,
              const std::string& spacing) {
  if (!at.empty()) config["at"] = at;
  if (!grid.empty()) {
    config["grid"] = grid;
    config["spacing"] = spacing;
  }
}

// A result table: doubles print in shortest round-trip form.
using Cell = std::variant<std::string, double, std::uint64_t>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  return std::to_string(std::get<std::uint64_t>(c));
}

json cell_json(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) {
    // JSON has no infinities
    if (!std::isfinite(*d)) return format_double(*d);
    return *d;
  }
  return std::get<std::uint64_t>(c);
}

void write_aligned(std::ostream& out, const std::vector<std::string>& columns,
                   const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    width[c] = columns[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out << "  ";
      out << std::string(width[c] - cells[c].size(), ' ') << cells[c];
    }
    out << '\n';
  };
  line(columns);
  for (const auto& r : rows) line(r);
}

void write_table(std::ostream& out, const std::string& format, const json& config, const Table& t) {
  if (format == "json") {
    json doc;
    doc["config"] = config;
    auto& rows = doc["rows"] = json::array();
    for (const auto& r : t.rows) {
      json row;
      for (std::size_t c = 0; c < t.columns.size(); ++c) row[t.columns[c]] = cell_json(r[c]);
      rows.push_back(std::move(row));
    }
    out << doc.dump(2) << '\n';
    return;
  }
  out << "# " << config.dump() << '\n';
  std::vector<std::vector<std::string>> text;
  for (const auto& r : t.rows) {
    std::vector<std::string> line;
    for (const auto& c : r) line.push_back(cell_text(c));
    text.push_back(std::move(line));
  }
  if (format == "table") {
    write_aligned(out, t.columns, text);
    return;
  }
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
  out << '\n';
  for (const auto& line : text) {
    for (std::size_t c = 0; c < line.size(); ++c) out << (c ? "," : "") << line[c];
    out << '\n';
  }
}

// Writes to --output, or to `out` when none was given.
template <class Writer>
void emit(const Common& c, std::ostream& out, Writer&& write) {
  if (c.output.empty()) {
    write(out);
    return;
  }
  std::ofstream file(c.output, std::ios::binary);
  if (!file) throw UsageError("cannot open '" + c.output + "' for writing");
  write(file);
  if (!file) throw std::runtime_error("write to '" + c.output + "' failed");
}

// density -------------------------------------------------------------------

struct DensityArgs {
  Common common;
  std::vector<std::string> families;
  std::string var;
  std::vector<double> at;
  std::vector<double> grid;
  std::string spacing = "linear";
  bool quadrature = false;
};

double density_value(PriorFamily f, const std::string& var, double x, bool quadrature) {
  if (var == "phi") {
    const auto d = phi_marginal(f, x);
    return d.asymptote ? std::numeric_limits<double>::infinity() : d.value;
  }
  if (var == "p") {
    switch (f) {
      case PriorFamily::HTHS: return density_p(DecisionPrior::HTHSUniform, x).value;
      case PriorFamily::HTHSLambda: return density_p(DecisionPrior::HTHSLambda, x).value;
      case PriorFamily::HS: throw UsageError("HS fixes p at 1/2 (a point mass); it has no p density");
      default: throw UsageError(std::string(family_label(f)) + " has no decision parameter p");
    }
  }
  if (!has_closed_form_gamma(f) && !quadrature) {
    throw UsageError(std::string(family_label(f)) + " has no closed-form " + var +
                     " density; add --quadrature to integrate over p");
  }
  if (var == "gamma") return quadrature ? prior_density_gamma(f, x) : density_gamma(f, x);
  return quadrature ? prior_density_tau(f, x) : density_tau(f, x);
}

void run_density(const DensityArgs& a, std::ostream& out) {
  std::vector<PriorFamily> families;
  if (a.families.empty()) {
    if (a.var == "p") {
      families = {PriorFamily::HTHS, PriorFamily::HTHSLambda};
    } else {
      families.assign(kClosedFormFamilies.begin(), kClosedFormFamilies.end());
    }
  } else {
    families = parse_families(a.families);
  }
  const auto xs = make_grid(a.at, a.grid, a.spacing);

  json config = {{"command", "density"}, {"family", family_names(families)}, {"var", a.var}};
  put_grid(config, a.at, a.grid, a.spacing);
  config["quadrature"] = a.quadrature;
  put_common(config, a.common);

  Table t{{"family", "x", "value", "curve"}, {}};
  for (auto f : families) {
    for (double x : xs) {
      t.rows.push_back({std::string(family_label(f)), x, density_value(f, a.var, x, a.quadrature), a.var});
    }
  }
  emit(a.common, out, [&](std::ostream& o) { write_table(o, a.common.format, config, t); });
}

// sample --------------------------------------------------------------------

struct SampleArgs {
  Common common;
  std::string family;
  std::string data;
  std::string column;
  std::string draws;
  std::string fix_globals;
  ChainConfig chain;
  GlobalPriors priors;
  bool drop_local_scales = false;
};

std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// One number per line, or with a column selector a CSV whose selected column
// is named in a header row or given as a 1-based index.
std::vector<double> read_observations(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open data file '" + path + "'");
  std::vector<double> y;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> index;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    std::string field = line;
    if (!column.empty()) {
      const auto fields = split(line, ',');
      if (first) {
        first = false;
        const auto named = std::find(fields.begin(), fields.end(), column);
        if (named != fields.end()) {
          index = static_cast<std::size_t>(named - fields.begin());
          continue;
        }
        const auto k = parse_number(column);
        if (!k || *k < 1 || *k != std::floor(*k)) throw UsageError("column '" + column + "' not found in header");
        index = static_cast<std::size_t>(*k) - 1;
        // a header row that does not name the column is skipped
        if (*index < fields.size() && !parse_number(fields[*index])) continue;
      }
      if (*index >= fields.size()) {
        throw UsageError(path + ":" + std::to_string(line_no) + ": no column " + std::to_string(*index + 1));
      }
      field = fields[*index];
    }
    const auto v = parse_number(field);
    if (!v || !std::isfinite(*v)) throw UsageError(path + ":" + std::to_string(line_no) + ": not a number: '" + field + "'");
    y.push_back(*v);
  }
  if (y.empty()) throw UsageError("data file '" + path + "' holds no observations");
  return y;
}

std::optional<FixedGlobals> parse_fixed_globals(const std::string& text) {
  if (text.empty() || text == "none") return std::nullopt;
  FixedGlobals f;
  for (const auto& pair : split(text, ',')) {
    const auto eq = pair.find('=');
    const auto v = eq == std::string::npos ? std::nullopt : parse_number(pair.substr(eq + 1));
    if (!v) throw UsageError("--fix-globals expects name=value pairs, got '" + pair + "'");
    const auto key = pair.substr(0, eq);
    if (key == "mu") {
      f.mu = *v;
    } else if (key == "sigma2") {
      f.sigma2 = *v;
    } else if (key == "z") {
      f.z = *v;
    } else {
      throw UsageError("--fix-globals: unknown parameter '" + key + "' (mu, sigma2, z)");
    }
  }
  f.validate();
  return f;
}

json summary_json(const PosteriorSummary& s) {
  json j;
  j["retained"] = s.retained;
  auto& params = j["parameters"] = json::array();
  for (const auto& p : s.parameters) {
    params.push_back({{"name", p.name}, {"mean", p.mean}, {"median", p.median}, {"lower", p.lower}, {"upper", p.upper}});
  }
  j["phi_ess"] = s.phi_ess;
  j["counters"] = {{"slice_updates", s.counters.slice_updates},
                   {"slice_evaluations", s.counters.slice_evaluations},
                   {"box_rejections", s.counters.box_rejections}};
  return j;
}

void run_sample(SampleArgs a, std::ostream& out) {
  const PriorFamily family = parse_families({a.family}).front();
  const auto y = read_observations(a.data, a.column);
  a.chain.seed = a.common.seed;
  a.chain.fixed_globals = parse_fixed_globals(a.fix_globals);
  a.chain.retain_local_scales = !a.drop_local_scales;
  try {
    a.chain.validate();
    a.priors.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }

  json config = {{"command", "sample"},
                 {"family", std::string(family_label(family))},
                 {"data", a.data},
                 {"iterations", a.chain.iterations},
                 {"burn-in", a.chain.burn_in},
                 {"thinning", a.chain.thinning},
                 {"slice-width", a.chain.slice_width},
                 {"fix-globals", a.fix_globals.empty() ? "none" : a.fix_globals},
                 {"drop-local-scales", a.drop_local_scales},
                 {"mu-mean", a.priors.mu_mean},
                 {"mu-scale", a.priors.mu_scale_multiplier},
                 {"sigma2-shape", a.priors.sigma2_shape},
                 {"sigma2-rate", a.priors.sigma2_rate},
                 {"z-shape", a.priors.z_shape},
                 {"z-rate", a.priors.z_rate}};
  if (!a.column.empty()) config["column"] = a.column;
  if (!a.draws.empty()) config["draws"] = a.draws;
  put_common(config, a.common);

  const auto result = run_chain(y, family, a.priors, a.chain);
  if (!a.draws.empty()) result.draws.save(a.draws);

  emit(a.common, out, [&](std::ostream& o) {
    if (a.common.format == "json") {
      json doc = summary_json(result.summary);
      doc["config"] = config;
      doc["family"] = family_label(family);
      doc["n"] = y.size();
      o << doc.dump(2) << '\n';
      return;
    }
    Table t{{"name", "mean", "median", "lower", "upper"}, {}};
    for (const auto& p : result.summary.parameters) t.rows.push_back({p.name, p.mean, p.median, p.lower, p.upper});
    write_table(o, a.common.format, config, t);
  });
}

// risk ----------------------------------------------------------------------

struct RiskArgs {
  Common common;
  std::vector<std::string> families;
  double phi0 = 0.0;
  std::vector<std::size_t> n;
  std::vector<std::size_t> n_grid;
};

void run_risk(const RiskArgs& a, std::ostream& out) {
  auto families = a.families.empty() ? std::vector<PriorFamily>(kClosedFormFamilies.begin(), kClosedFormFamilies.end())
                                     : parse_families(a.families);
  std::sort(families.begin(), families.end(), [](PriorFamily x, PriorFamily y) { return family_label(x) < family_label(y); });
  families.erase(std::unique(families.begin(), families.end()), families.end());
  if (!a.n.empty() && !a.n_grid.empty()) throw UsageError("give either --n or --n-grid, not both");
  std::vector<std::size_t> ns = a.n;
  if (!a.n_grid.empty()) {
    if (a.n_grid.size() != 3) throw UsageError("--n-grid takes lo,hi,points");
    ns = log_count_grid(a.n_grid[0], a.n_grid[1], a.n_grid[2]);
  }
  if (ns.empty()) throw UsageError("one of --n or --n-grid is required");
  for (auto n : ns) {
    if (n == 0) throw UsageError("sample sizes must be positive");
  }
  std::sort(ns.begin(), ns.end());

  json config = {{"command", "risk"}, {"family", family_names(families)}, {"phi0", a.phi0}};
  if (!a.n.empty()) config["n"] = a.n;
  if (!a.n_grid.empty()) config["n-grid"] = a.n_grid;
  put_common(config, a.common);

  Table t{{"family", "n", "epsilon", "half_width", "mass", "bound"}, {}};
  for (auto f : families) {
    for (auto n : ns) {
      const auto r = kl_risk_bound(f, a.phi0, n);
      t.rows.push_back({std::string(family_label(f)), static_cast<std::uint64_t>(n), r.epsilon, r.half_width, r.mass, r.bound});
    }
  }
  emit(a.common, out, [&](std::ostream& o) { write_table(o, a.common.format, config, t); });
}

// predictive ----------------------------------------------------------------

struct PredictiveArgs {
  Common common;
  std::vector<std::string> families;
  std::vector<double> at;
  std::vector<double> grid;
  std::string spacing = "linear";
};

void run_predictive(const PredictiveArgs& a, std::ostream& out) {
  const auto families = a.families.empty()
                            ? std::vector<PriorFamily>(kClosedFormFamilies.begin(), kClosedFormFamilies.end())
                            : parse_families(a.families);
  const auto ys = make_grid(a.at, a.grid, a.spacing);

  json config = {{"command", "predictive"}, {"family", family_names(families)}};
  put_grid(config, a.at, a.grid, a.spacing);
  put_common(config, a.common);

  Table t{{"family", "x", "value", "curve"}, {}};
  for (auto f : families) {
    const auto score = log_predictive_score(f, ys);
    for (std::size_t i = 0; i < ys.size(); ++i) {
      t.rows.push_back({std::string(family_label(f)), ys[i], log_marginal_likelihood(f, ys[i]), std::string("log_m")});
    }
    for (std::size_t i = 0; i < ys.size(); ++i) {
      t.rows.push_back({std::string(family_label(f)), ys[i], score[i], std::string("score")});
    }
  }
  emit(a.common, out, [&](std::ostream& o) { write_table(o, a.common.format, config, t); });
}

// simulate ------------------------------------------------------------------

struct SimulateArgs {
  Common common;
  bool paper_scale = false;
  std::size_t n = 0;
  std::vector<double> etas;
  double mu_true = 0.0;
  std::size_t replicates = 0;
  std::size_t iterations = 0;
  std::size_t burn_in = 0;
  std::size_t thinning = 0;
  std::size_t threads = 0;
  std::vector<std::string> models;
  std::string table;
  CLI::App* app = nullptr;
};

void run_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  auto given = [&](const char* name) { return a.app->get_option(name)->count() > 0; };
  SimulationDesign design = a.paper_scale ? SimulationDesign::paper_scale() : SimulationDesign{};
  design.seed = a.common.seed;
  if (given("--n")) design.n = a.n;
  if (given("--eta")) design.etas = a.etas;
  if (given("--mu-true")) design.mu_true = a.mu_true;
  if (given("--replicates")) design.replicates = a.replicates;
  if (given("--iterations")) design.chain.iterations = a.iterations;
  if (given("--burn-in")) design.chain.burn_in = a.burn_in;
  if (given("--thinning")) design.chain.thinning = a.thinning;
  design.threads = a.threads;
  if (given("--models")) {
    const auto all = default_models();
    design.models.clear();
    for (const auto& name : a.models) {
      if (name == "mle" || name == "MLE") {
        design.models.push_back(all.front());
        continue;
      }
      const PriorFamily f = parse_families({name}).front();
      design.models.push_back(*std::find_if(all.begin(), all.end(), [&](const ModelSpec& m) { return m.family == f; }));
    }
  }
  try {
    design.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }

  std::vector<std::string> model_labels;
  for (const auto& m : design.models) model_labels.push_back(m.label);
  json config = {{"command", "simulate"},
                 {"paper-scale", a.paper_scale},
                 {"n", design.n},
                 {"eta", design.etas},
                 {"mu-true", design.mu_true},
                 {"replicates", design.replicates},
                 {"iterations", design.chain.iterations},
                 {"burn-in", design.chain.burn_in},
                 {"thinning", design.chain.thinning},
                 {"threads", design.threads},
                 {"models", model_labels}};
  if (!a.table.empty()) config["table"] = a.table;
  put_common(config, a.common);

  const auto report = evaluate_models(design);

  if (!a.table.empty()) {
    std::ofstream file(a.table, std::ios::binary);
    if (!file) throw UsageError("cannot open '" + a.table + "' for writing");
    file << "# " << config.dump() << '\n' << report.text_table();
  }
  emit(a.common, out, [&](std::ostream& o) {
    if (a.common.format == "json") {
      json doc;
      doc["config"] = config;
      doc["report"] = report.to_json();
      o << doc.dump(2) << '\n';
    } else if (a.common.format == "table") {
      o << "# " << config.dump() << '\n' << report.text_table();
    } else {
      Table t{{"model", "eta", "completed", "failed", "mae_mean", "mae_se", "ora_mean", "ora_se"}, {}};
      for (const auto& c : report.cells) {
        t.rows.push_back({c.model, c.eta, static_cast<std::uint64_t>(c.completed), static_cast<std::uint64_t>(c.failed),
                          c.mae_mean, c.mae_se, c.ora_mean, c.ora_se});
      }
      write_table(o, "csv", config, t);
    }
  });
  std::size_t failed = 0;
  for (const auto& r : report.rows) failed += r.failed ? 1 : 0;
  if (failed > 0) err << "warning: " << failed << " chain(s) diverged and were excluded\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heavy-tailed horseshoe shrinkage priors: densities, posterior sampling, risk bounds, simulation",
               "hths"};
  app.fallthrough();
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>(app));
  app.set_config("--config", "", "Flat JSON of flag values, or an earlier output of this program");

  const std::string families_text = "Prior families, comma separated (hs, hsplus, hths, hthsplus, hths_lambda)";

  DensityArgs density;
  auto* density_cmd = app.add_subcommand("density", "Prior density of gamma, tau, p or phi");
  density_cmd->add_option("--family", density.families, families_text)->delimiter(',');
  density_cmd->add_option("--var", density.var, "Variable")->required()->check(CLI::IsMember({"gamma", "tau", "p", "phi"}));
  density_cmd->add_option("--at", density.at, "Evaluation points, comma separated")->delimiter(',');
  density_cmd->add_option("--grid", density.grid, "lo,hi,points")->delimiter(',');
  density_cmd->add_option("--spacing", density.spacing, "Grid spacing")
      ->check(CLI::IsMember({"linear", "log", "symmetric-log"}));
  density_cmd->add_flag("--quadrature", density.quadrature, "Integrate over p where no closed form exists");
  add_common(*density_cmd, density.common, "csv");

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Run the Gibbs sampler on observed data");
  sample_cmd->add_option("--family", sample.family, "Prior family")->required();
  sample_cmd->add_option("--data", sample.data, "Observations: one per line, or CSV with --column")->required();
  sample_cmd->add_option("--column", sample.column, "CSV column name or 1-based index");
  sample_cmd->add_option("--draws", sample.draws, "Write the retained draws to this file");
  sample_cmd->add_option("--iterations", sample.chain.iterations, "Total sweeps including burn-in");
  sample_cmd->add_option("--burn-in", sample.chain.burn_in, "Sweeps discarded before retaining");
  sample_cmd->add_option("--thinning", sample.chain.thinning, "Keep every k-th sweep after burn-in");
  sample_cmd->add_option("--slice-width", sample.chain.slice_width, "Initial slice bracket width");
  sample_cmd->add_option("--fix-globals", sample.fix_globals, "Pin globals, e.g. mu=0,sigma2=1,z=1");
  sample_cmd->add_flag("--drop-local-scales", sample.drop_local_scales, "Store only globals and phi");
  sample_cmd->add_option("--mu-mean", sample.priors.mu_mean, "Prior mean of mu");
  sample_cmd->add_option("--mu-scale", sample.priors.mu_scale_multiplier, "Prior variance of mu in units of sigma2");
  sample_cmd->add_option("--sigma2-shape", sample.priors.sigma2_shape, "Inverse-gamma shape of sigma2");
  sample_cmd->add_option("--sigma2-rate", sample.priors.sigma2_rate, "Inverse-gamma rate of sigma2");
  sample_cmd->add_option("--z-shape", sample.priors.z_shape, "Gamma shape of Z");
  sample_cmd->add_option("--z-rate", sample.priors.z_rate, "Gamma rate of Z");
  add_common(*sample_cmd, sample.common, "json");

  RiskArgs risk;
  auto* risk_cmd = app.add_subcommand("risk", "Kullback-Leibler risk bound at phi0");
  risk_cmd->add_option("--family", risk.families, families_text)->delimiter(',');
  risk_cmd->add_option("--phi0", risk.phi0, "True mean");
  risk_cmd->add_option("--n", risk.n, "Sample sizes, comma separated")->delimiter(',');
  risk_cmd->add_option("--n-grid", risk.n_grid, "lo,hi,points on a log scale")->delimiter(',');
  add_common(*risk_cmd, risk.common, "csv");

  PredictiveArgs predictive;
  auto* predictive_cmd = app.add_subcommand("predictive", "Log marginal likelihood and its score");
  predictive_cmd->add_option("--family", predictive.families, families_text)->delimiter(',');
  predictive_cmd->add_option("--at", predictive.at, "Observations, comma separated")->delimiter(',');
  predictive_cmd->add_option("--grid", predictive.grid, "lo,hi,points")->delimiter(',');
  predictive_cmd->add_option("--spacing", predictive.spacing, "Grid spacing")
      ->check(CLI::IsMember({"linear", "log", "symmetric-log"}));
  add_common(*predictive_cmd, predictive.common, "csv");

  SimulateArgs simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Sparse normal-means benchmark");
  simulate.app = simulate_cmd;
  simulate_cmd->add_flag("--paper-scale", simulate.paper_scale, "20 replicates and full-length chains");
  simulate_cmd->add_option("--n", simulate.n, "Observations per data set");
  simulate_cmd->add_option("--eta", simulate.etas, "Signal fractions, comma separated")->delimiter(',');
  simulate_cmd->add_option("--mu-true", simulate.mu_true, "Common mean of the data");
  simulate_cmd->add_option("--replicates", simulate.replicates, "Data sets per signal fraction");
  simulate_cmd->add_option("--iterations", simulate.iterations, "Sweeps per chain including burn-in");
  simulate_cmd->add_option("--burn-in", simulate.burn_in, "Burn-in sweeps");
  simulate_cmd->add_option("--thinning", simulate.thinning, "Thinning interval");
  simulate_cmd->add_option("--threads", simulate.threads, "Worker threads (0: all cores)");
  simulate_cmd->add_option("--models", simulate.models, "Subset of models, comma separated (mle, hs, ...)")
      ->delimiter(',');
  simulate_cmd->add_option("--table", simulate.table, "Also write the text table here");
  add_common(*simulate_cmd, simulate.common, "json");

  for (auto* sub : app.get_subcommands({})) {
    for (auto* opt : sub->get_options()) {
      if (opt->get_items_expected_max() <= 1) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (density_cmd->parsed()) run_density(density, out);
    if (sample_cmd->parsed()) run_sample(sample, out);
    if (risk_cmd->parsed()) run_risk(risk, out);
    if (predictive_cmd->parsed()) run_predictive(predictive, out);
    if (simulate_cmd->parsed()) run_simulate(simulate, out, err);
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}

}  // namespace hths::cli
