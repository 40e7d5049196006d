#include "hths/serialization.hpp"

namespace hths {

void to_json(nlohmann::json& j, const GlobalPriors& p) {
  j = {{"mu_mean", p.mu_mean},           {"mu_scale_multiplier", p.mu_scale_multiplier},
       {"sigma2_shape", p.sigma2_shape}, {"sigma2_rate", p.sigma2_rate},
       {"z_shape", p.z_shape},           {"z_rate", p.z_rate}};
}

// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, GlobalPriors& p) {
  p.mu_mean = j.value("mu_mean", p.mu_mean);
  p.mu_scale_multiplier = j.value("mu_scale_multiplier", p.mu_scale_multiplier);
  p.sigma2_shape = j.value("sigma2_shape", p.sigma2_shape);
  p.sigma2_rate = j.value("sigma2_rate", p.sigma2_rate);
  p.z_shape = j.value("z_shape", p.z_shape);
  p.z_rate = j.value("z_rate", p.z_rate);
}

void to_json(nlohmann::json& j, const FixedGlobals& f) { j = {{"mu", f.mu}, {"sigma2", f.sigma2}, {"z", f.z}}; }

void from_json(const nlohmann::json& j, FixedGlobals& f) {
  f.mu = j.value("mu", f.mu);
  f.sigma2 = j.value("sigma2", f.sigma2);
  f.z = j.value("z", f.z);
}

void to_json(nlohmann::json& j, const ChainConfig& c) {
  j = {{"iterations", c.iterations},   {"burn_in", c.burn_in},
       {"thinning", c.thinning},       {"seed", c.seed},
       {"slice_width", c.slice_width}, {"retain_local_scales", c.retain_local_scales}};
  j["fixed_globals"] = c.fixed_globals ? nlohmann::json(*c.fixed_globals) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ChainConfig& c) {
  c.iterations = j.value("iterations", c.iterations);
  c.burn_in = j.value("burn_in", c.burn_in);
  c.thinning = j.value("thinning", c.thinning);
  c.seed = j.value("seed", c.seed);
  c.slice_width = j.value("slice_width", c.slice_width);
  c.retain_local_scales = j.value("retain_local_scales", c.retain_local_scales);
  if (j.contains("fixed_globals") && !j["fixed_globals"].is_null()) {
    c.fixed_globals = j["fixed_globals"].get<FixedGlobals>();
  } else {
    c.fixed_globals.reset();
  }
}

}  // namespace hths
