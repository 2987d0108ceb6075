#include "rmsim/json_io.hpp"

#include <fstream>

#include "rmsim/errors.hpp"

namespace rmsim {

namespace {

double number_field(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("model JSON: missing field '") + key + "'");
  if (!j.at(key).is_number()) {
    throw ConfigError(std::string("model JSON: field '") + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

VectorX<double> vector_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw ConfigError(std::string("model JSON: field '") + key + "' must be an array");
  }
  const auto& arr = j.at(key);
  VectorX<double> v(arr.size());
  for (std::size_t k = 0; k < arr.size(); ++k) {
    if (!arr[k].is_number()) throw ConfigError(std::string("model JSON: non-numeric entry in ") + key);
    v[static_cast<Eigen::Index>(k)] = arr[k].get<double>();
  }
  return v;
}

json to_array(const VectorX<double>& v) {
  json arr = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(v[k]);
  return arr;
}

}  // namespace

json to_json(const DemandModel& model) {
  return json{{"kind", to_string(model.kind())},
              {"alpha", model.alpha()},
              {"beta", model.beta()},
              {"p_lo", model.interval().p_lo},
              {"p_hi", model.interval().p_hi},
              {"noise_half_width", model.noise_half_width()}};
}

DemandModel demand_model_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("model JSON must be an object");
  const auto kind = demand_kind_from_string(j.value("kind", std::string{}));
  const double alpha = number_field(j, "alpha");
  const double beta = number_field(j, "beta");
  const double p_lo = j.contains("p_lo") ? number_field(j, "p_lo") : 0.0;
  const double p_hi = j.contains("p_hi") ? number_field(j, "p_hi") : 1.0;
  if (kind == DemandKind::linear_bernoulli) {
    return DemandModel::linear_bernoulli(alpha, beta, p_lo, p_hi);
  }
  return DemandModel::linear_additive(alpha, beta, p_lo, p_hi, number_field(j, "noise_half_width"));
}

json to_json(const MultiDemandModel<double>& model) {
  json h = json::array();
  for (Eigen::Index r = 0; r < model.H.rows(); ++r) h.push_back(to_array(model.H.row(r).transpose()));
  return json{{"kind", kMultiQuadraticKind},
              {"g", to_array(model.g)},
              {"H", h},
              {"box_hi", to_array(model.box_hi)}};
}

MultiDemandModel<double> multi_model_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("model JSON must be an object");
  if (j.value("kind", std::string{}) != kMultiQuadraticKind) {
    throw ConfigError(std::string("multi-product model must have kind '") + kMultiQuadraticKind + "'");
  }
  MultiDemandModel<double> m;
  m.g = vector_field(j, "g");
  m.box_hi = vector_field(j, "box_hi");
  if (!j.contains("H") || !j.at("H").is_array()) throw ConfigError("model JSON: 'H' must be an array of rows");
  const auto& rows = j.at("H");
  m.H.resize(static_cast<Eigen::Index>(rows.size()), m.g.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != static_cast<std::size_t>(m.g.size())) {
      throw ConfigError("model JSON: every row of 'H' must have one entry per product");
    }
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m.H(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
    }
  }
  return m;
}

AnyModel any_model_from_json(const json& j) {
  if (j.is_object() && j.value("kind", std::string{}) == kMultiQuadraticKind) {
    return multi_model_from_json(j);
  }
  return demand_model_from_json(j);
}

json to_json(const FluidSolution<double>& sol) {
  return json{{"x_c", to_array(sol.x_c)},
              {"lambda", to_array(sol.lambda)},
              {"active_set", sol.active_set},
              {"objective", sol.objective},
              {"degenerate", sol.degenerate},
              {"clamped_low", sol.clamped_low}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in '" + path + "': " + e.what());
  }
}

}  // namespace rmsim
