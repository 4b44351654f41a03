#pragma once

#include "lmsv/asymptotics.hpp"
#include "lmsv/model.hpp"
#include "lmsv/montecarlo.hpp"
#include "lmsv/simulate.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace lmsv {

inline constexpr std::string_view kToolVersion = "lmsv 0.1.0";

using nlohmann::json;

json to_json(const CoefficientSpec& spec);
json to_json(const ModelSpec& spec);
json to_json(const SimConfig& config);
json to_json(const McConfig& config);
json to_json(const AsymptoticConstants& constants);
json to_json(const NSummary& summary);
json to_json(const RateRecord& rate);
json to_json(const NormalityRecord& record);
json to_json(const VarianceMatch& match);

// Strict parsers: unknown keys, wrong types and invalid values raise
// ConfigError whose field is the dotted path, e.g. "model.a.beta".
CoefficientSpec coeffs_from_json(const json& j, const std::string& path);
ModelSpec model_from_json(const json& j, const std::string& path = "model");
SimConfig sim_from_json(const json& j, const std::string& path = "sim");

/// Top level document: {"model": {...}, "sim": {...}, "mc": {...}}; sim and mc are optional.
struct RunConfig {
    ModelSpec model;
    SimConfig sim;
    McConfig mc;
};

RunConfig run_config_from_json(const json& j);
json to_json(const RunConfig& config);

/// Sets a dotted path inside j; value is parsed as JSON, falling back to a plain string.
void apply_override(json& j, const std::string& assignment);

json load_json_file(const std::string& path);

}  // namespace lmsv
