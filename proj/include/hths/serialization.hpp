#pragma once

// JSON conversions for the configuration records.

#include "hths/densities.hpp"
#include "hths/model.hpp"
#include "json.hpp"

namespace hths {

void to_json(nlohmann::json& j, const GlobalPriors& p);
void from_json(const nlohmann::json& j, GlobalPriors& p);
void to_json(nlohmann::json& j, const FixedGlobals& f);
void from_json(const nlohmann::json& j, FixedGlobals& f);
void to_json(nlohmann::json& j, const ChainConfig& c);
void from_json(const nlohmann::json& j, ChainConfig& c);

}  // namespace hths
