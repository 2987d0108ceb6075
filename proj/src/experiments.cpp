#include "rmsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "rmsim/errors.hpp"
#include "rmsim/rng.hpp"
#include "rmsim/stats.hpp"

namespace rmsim {

Y0Rule::Y0Rule(std::int64_t num, std::int64_t den) {
  if (den <= 0 || num < 0) throw ConfigError("y0 rule: coefficient must be a nonnegative rational");
  const auto g = std::gcd(num, den);
  num_ = num / (g == 0 ? 1 : g);
  den_ = den / (g == 0 ? 1 : g);
}

Y0Rule Y0Rule::parse(const std::string& text) {
  static const std::regex pattern(
      R"(^\s*round\(\s*([0-9]+)(?:\.([0-9]+))?\s*(?:/\s*([0-9]+)\s*)?\*\s*T\s*\)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) {
    throw ConfigError("y0 rule '" + text + "' is not of the form round(c*T) with rational c");
  }
  const std::string frac = m[2].matched ? m[2].str() : std::string{};
  if (m[1].length() + frac.size() > 15 || (m[3].matched && m[3].length() > 15)) {
    throw ConfigError("y0 rule coefficient has too many digits");
  }
  std::int64_t num = std::stoll(m[1].str() + frac);
  std::int64_t den = 1;
  for (std::size_t k = 0; k < frac.size(); ++k) den *= 10;
  if (m[3].matched) den *= std::stoll(m[3].str());
  if (den == 0) throw ConfigError("y0 rule: zero denominator");
  return Y0Rule(num, den);
}

long Y0Rule::operator()(long horizon) const {
  return static_cast<long>((2 * num_ * horizon + den_) / (2 * den_));
}

std::string Y0Rule::to_string() const { return fmt::format("round({}/{}*T)", num_, den_); }

ExperimentConfig experiment_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  ExperimentConfig c;
  try {
    c.name = j.value("name", c.name);
    if (!j.contains("model")) throw ConfigError("experiment config: missing 'model'");
    c.model = j.at("model");
    c.horizons = j.at("T_list").get<std::vector<long>>();
    c.y0_rule = Y0Rule::parse(j.at("y0_rule").get<std::string>());
    c.policies = j.at("policies").get<std::vector<std::string>>();
    c.replications = j.value("replications", c.replications);
    c.base_seed = j.value("base_seed", c.base_seed);
    c.output = j.value("output", c.output);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  if (c.horizons.empty()) throw ConfigError("experiment config: T_list is empty");
  for (std::size_t k = 0; k < c.horizons.size(); ++k) {
    if (c.horizons[k] < 1 || (k > 0 && c.horizons[k] <= c.horizons[k - 1])) {
      throw ConfigError("experiment config: T_list must be positive and strictly ascending");
    }
  }
  for (const auto& p : c.policies) {
    if (p != "static" && p != "resolving" && p != "dp" && p != "ho") {
      throw ConfigError("experiment config: unknown policy '" + p + "'");
    }
  }
  if (c.replications < 1) throw ConfigError("experiment config: replications must be >= 1");
  return c;
}

json to_json(const ExperimentConfig& c) {
  return json{{"name", c.name},         {"model", c.model},
              {"T_list", c.horizons},   {"y0_rule", c.y0_rule.to_string()},
              {"policies", c.policies}, {"replications", c.replications},
              {"base_seed", c.base_seed}, {"output", c.output}};
}

DemandModel reference_model() { return DemandModel::linear_bernoulli(0.75, 0.5, 0.0, 1.0); }

namespace {

std::vector<RegretReport> regret_cells(const DemandModel& model, const std::vector<long>& horizons,
                                       const Y0Rule& rule, const std::vector<std::string>& policies,
                                       long replications, std::uint64_t seed) {
  std::vector<RegretReport> out(horizons.size());
  parallel_for(horizons.size(), [&](std::size_t i) {
    out[i] = estimate_regret(model, std::span(&horizons[i], 1), rule, policies, replications, seed)
                 .front();
  });
  return out;
}

}  // namespace

std::vector<RegretReport> run_experiment(const ExperimentConfig& config) {
  const auto model = demand_model_from_json(config.model);
  std::vector<std::string> policies{"fluid"};
  policies.insert(policies.end(), config.policies.begin(), config.policies.end());
  return regret_cells(model, config.horizons, config.y0_rule, policies, config.replications,
                      config.base_seed);
}

std::vector<RegretReport> run_table2(const std::vector<long>& horizons, bool allow_large) {
  for (long T : horizons) {
    if (T > kTable2SlicedThreshold && !allow_large) {
      throw ResourceError(fmt::format("T = {} exceeds 2^15; pass --sliced-dp to run it", T));
    }
  }
  return regret_cells(reference_model(), horizons, Y0Rule(5, 16), {"fluid", "static", "resolving"},
                      1, 0);
}

std::string format_table2(const std::vector<RegretReport>& reports) {
  std::string out = fmt::format("{:<22}", "log2 T");
  for (const auto& r : reports) out += fmt::format("{:>8}", std::lround(std::log2(double(r.horizon))));
  out += "\n";
  const std::pair<const char*, const char*> rows[] = {
      {"Fluid model", "fluid"}, {"Static policy", "static"}, {"Re-solving heuristic", "resolving"}};
  for (const auto& [label, key] : rows) {
    out += fmt::format("{:<22}", label);
    for (const auto& r : reports) out += fmt::format("{:>8.2f}", r.row(key).regret_vs_dp.value_or(NAN));
    out += "\n";
  }
  return out;
}

SweepConfig SweepConfig::defaults(SweepKind kind, int min_log2, int max_log2) {
  SweepConfig c;
  c.kind = kind;
  for (int k = min_log2; k <= max_log2; ++k) c.horizons.push_back(1L << k);
  if (kind == SweepKind::gap) {
    c.values = {0.3, 0.325, 0.35, 0.375};
  } else {
    c.values = {0.3, 0.5, 0.7, 0.9};
  }
  return c;
}

bool SweepCurve::strictly_increasing() const {
  for (std::size_t k = 1; k < points.size(); ++k)
    if (!(points[k].regret > points[k - 1].regret)) return false;
  return true;
}

double SweepCurve::plateau_rise(long horizon) const {
  const auto base = std::find_if(points.begin(), points.end(),
                                 [&](const auto& p) { return p.horizon == horizon; });
  if (base == points.end()) throw std::out_of_range("plateau_rise: horizon not on the curve");
  double worst = base->regret;
  for (auto it = base; it != points.end(); ++it) worst = std::max(worst, it->regret);
  return worst - base->regret;
}

DemandModel sweep_model(SweepKind kind, double parameter) {
  if (kind == SweepKind::gap) return reference_model();
  return DemandModel::linear_bernoulli(parameter, parameter, 0.0, kConcavitySweepPriceCeiling);
}

std::vector<SweepCurve> run_sweep(const SweepConfig& config) {
  const std::size_t nT = config.horizons.size();
  std::vector<SweepCurve> curves(config.values.size());
  std::vector<SweepPoint> cells(config.values.size() * nT);
  parallel_for(cells.size(), [&](std::size_t i) {
    const double param = config.values[i / nT];
    const long T = config.horizons[i % nT];
    const auto model = sweep_model(config.kind, param);
    const double x_T = config.kind == SweepKind::gap ? param : kConcavitySweepInventory;
    SweepPoint p;
    p.parameter = param;
    p.horizon = T;
    p.initial_inventory = std::lround(x_T * static_cast<double>(T));
    const PolicyPtr pol[] = {resolving_policy(model)};
    const auto ex = evaluate_exact(model, T, p.initial_inventory, pol);
    p.dp_value = ex.dp_value;
    p.resolving_value = ex.policy_values[0];
    p.regret = p.dp_value - p.resolving_value;
    cells[i] = p;
  });
  for (std::size_t v = 0; v < config.values.size(); ++v) {
    curves[v].parameter = config.values[v];
    curves[v].points.assign(cells.begin() + v * nT, cells.begin() + (v + 1) * nT);
  }
  return curves;
}

std::vector<HoPoint> run_ho_compare(const DemandModel& model, const std::vector<long>& horizons,
                                    double x_T, long replications, std::uint64_t seed,
                                    double level) {
  if (model.is_bernoulli()) {
    throw UnsupportedError("ho-compare needs additive i.i.d. noise; Bernoulli noise is price dependent");
  }
  if (replications < 1) throw DomainError("replications must be >= 1");
  const auto consts = assumption_constants(model);
  const double w = model.noise_half_width();
  std::vector<HoPoint> out;
  for (long T : horizons) {
    std::vector<double> revenue(replications);
    parallel_for(revenue.size(), [&](std::size_t i) {
      revenue[i] = ho_revenue(model, x_T, T, sample_xi_bar(model, T, replication_seed(seed, i)));
    });
    const auto s = summarize(revenue, level);
    HoPoint p;
    p.horizon = T;
    p.fluid_value = static_cast<double>(T) * model.revenue_rate(x_T);
    p.ho_value = s.mean;
    p.ci_half_width = s.half_width;
    p.gap = p.fluid_value - p.ho_value;
    p.bound = 0.5 * consts.m * w * w / 3.0;
    out.push_back(p);
  }
  return out;
}

std::string csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

void write_regret_csv(std::ostream& out, const std::vector<RegretReport>& reports) {
  out << kRegretCsvHeader << "\n";
  for (const auto& rep : reports) {
    for (const auto& row : rep.rows) {
      out << rep.horizon << ',' << row.policy << ',' << csv_number(row.value) << ','
          << csv_number(row.ci_half_width) << ','
          << (row.regret_vs_dp ? csv_number(*row.regret_vs_dp) : std::string{}) << ','
          << csv_number(row.regret_vs_fluid) << "\n";
    }
  }
}

void write_sweep_csv(std::ostream& out, SweepKind kind, const std::vector<SweepCurve>& curves) {
  out << "sweep,parameter,T,y0,resolving_value,dp_value,regret\n";
  const char* name = kind == SweepKind::gap ? "gap" : "concavity";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out << name << ',' << csv_number(p.parameter) << ',' << p.horizon << ','
          << p.initial_inventory << ',' << csv_number(p.resolving_value) << ','
          << csv_number(p.dp_value) << ',' << csv_number(p.regret) << "\n";
    }
  }
}

void write_ho_csv(std::ostream& out, const std::vector<HoPoint>& points) {
  out << "T,fluid_value,ho_value,ci_half_width,gap,bound\n";
  for (const auto& p : points) {
    out << p.horizon << ',' << csv_number(p.fluid_value) << ',' << csv_number(p.ho_value) << ','
        << csv_number(p.ci_half_width) << ',' << csv_number(p.gap) << ',' << csv_number(p.bound)
        << "\n";
  }
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  out << kTraceCsvHeader << "\n";
  for (std::size_t i = 0; i < trace.price.size(); ++i) {
    out << trace.tau(i) << ',' << csv_number(trace.price[i]) << ','
        << csv_number(trace.demand_rate[i]) << ',' << csv_number(trace.xi[i]) << ','
        << csv_number(trace.realized_demand[i]) << ',' << csv_number(trace.inventory_after[i])
        << ',' << csv_number(trace.revenue[i]) << "\n";
  }
}

void write_actions_csv(std::ostream& out, const DemandModel& model, const ValueTable& table) {
  out << "t,y,demand_rate,price\n";
  for (long t = 1; t <= table.horizon; ++t) {
    for (long y = 1; y <= table.max_inventory; ++y) {
      const double d = table.action(t, y);
      out << t << ',' << y << ',' << csv_number(d) << ',' << csv_number(model.inverse_demand(d))
          << "\n";
    }
  }
}

}  // namespace rmsim
