#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "rmsim/demand.hpp"
#include "rmsim/fluid.hpp"
#include "rmsim/quadratic.hpp"

namespace rmsim {

using json = nlohmann::json;

// Kind tag of multi-product quadratic models.
inline constexpr const char* kMultiQuadraticKind = "quadratic-bernoulli";

// {"kind", "alpha", "beta", "p_lo", "p_hi", "noise_half_width"}
json to_json(const DemandModel& model);
DemandModel demand_model_from_json(const json& j);

// {"kind": "quadratic-bernoulli", "g": [...], "H": [[...], ...], "box_hi": [...]}
json to_json(const MultiDemandModel<double>& model);
MultiDemandModel<double> multi_model_from_json(const json& j);

using AnyModel = std::variant<DemandModel, MultiDemandModel<double>>;
AnyModel any_model_from_json(const json& j);

json to_json(const FluidSolution<double>& sol);

json read_json_file(const std::string& path);

}  // namespace rmsim
