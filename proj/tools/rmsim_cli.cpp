// rmsim: command-line experiment runner.
//
// Exit codes: 0 success, 1 other failure, 2 configuration error,
// 3 model-validation failure, 4 resource guard.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rmsim/demand.hpp"
#include "rmsim/errors.hpp"
#include "rmsim/experiments.hpp"
#include "rmsim/fluid.hpp"
#include "rmsim/json_io.hpp"
#include "rmsim/multi.hpp"
#include "rmsim/policies.hpp"
#include "rmsim/quadratic.hpp"
#include "rmsim/sim.hpp"

namespace {

using namespace rmsim;

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;
constexpr int kExitResource = 4;

// Writes to --out when given, stdout otherwise.
void emit(const std::string& out_path, const std::function<void(std::ostream&)>& write) {
  if (out_path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw ConfigError("cannot open output '" + out_path + "'");
  write(file);
  if (!file) throw ConfigError("failed writing '" + out_path + "'");
}

std::vector<long> log2_grid(int lo, int hi) {
  if (lo < 0 || hi > 40 || lo > hi) throw ConfigError("invalid log2 T range");
  std::vector<long> out;
  for (int k = lo; k <= hi; ++k) out.push_back(1L << k);
  return out;
}

void guard_large(const std::vector<long>& horizons, bool sliced) {
  for (long T : horizons) {
    if (T > kTable2SlicedThreshold && !sliced) {
      throw ResourceError(fmt::format("T = {} exceeds 2^15; pass --sliced-dp to run it", T));
    }
  }
}

std::vector<double> parse_vector(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("'" + text + "' is not a comma-separated list of numbers");
    }
  }
  if (out.empty()) throw ConfigError("empty vector argument");
  return out;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void require_valid(const MultiModel& model) {
  const auto report = validate_multi(model);
  if (!report.valid) throw ValidationError(report.violations);
}

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<long> replications;
  bool sliced_dp = false;
  std::string inventory;
  long horizon = 0;
  std::string y0;
  std::string policy = "resolving";
  std::string dump_actions;
  std::string sweep_kind = "gap";
  int min_log2 = 6;
  int max_log2 = 15;
  double x_T = 5.0 / 16.0;
};

int fluid_solve(const Options& o) {
  const auto model = any_model_from_json(read_json_file(o.config));
  const auto x = parse_vector(o.inventory);
  json result;
  if (const auto* single = std::get_if<DemandModel>(&model)) {
    if (x.size() != 1) throw ConfigError("single-product model takes a scalar inventory");
    result = to_json(solve_fluid_single(*single, x[0]));
  } else {
    const auto& multi = std::get<MultiModel>(model);
    require_valid(multi);
    if (static_cast<Eigen::Index>(x.size()) != multi.size()) {
      throw ConfigError("inventory length does not match the number of products");
    }
    result = to_json(solve_fluid_multi(multi, to_eigen(x)));
  }
  emit(o.out, [&](std::ostream& os) { os << result.dump(2) << "\n"; });
  return 0;
}

int dp_value_cmd(const Options& o) {
  const auto model = any_model_from_json(read_json_file(o.config));
  const auto y = parse_vector(o.y0);
  if (const auto* single = std::get_if<DemandModel>(&model)) {
    if (y.size() != 1) throw ConfigError("single-product model takes a scalar y0");
    const long y0 = std::lround(y[0]);
    if (!o.dump_actions.empty()) {
      const auto table = solve_dp(*single, o.horizon, y0);
      emit(o.dump_actions, [&](std::ostream& os) { write_actions_csv(os, *single, table); });
      emit(o.out, [&](std::ostream& os) { os << csv_number(table.value(o.horizon, y0)) << "\n"; });
    } else {
      const double v = dp_value(*single, o.horizon, y0);
      emit(o.out, [&](std::ostream& os) { os << csv_number(v) << "\n"; });
    }
    return 0;
  }
  const auto& multi = std::get<MultiModel>(model);
  if (y.size() != 2) throw ConfigError("multi-product dp-value takes y0 as 'y1,y2'");
  if (!o.dump_actions.empty()) throw UnsupportedError("--dump-actions is single-product only");
  const auto table = solve_dp_multi(multi, o.horizon, {std::lround(y[0]), std::lround(y[1])});
  const double v = table.values[o.horizon](std::lround(y[0]), std::lround(y[1]));
  emit(o.out, [&](std::ostream& os) { os << csv_number(v) << "\n"; });
  return 0;
}

int simulate_cmd(const Options& o) {
  const auto model = demand_model_from_json(read_json_file(o.config));
  const double y0 = parse_vector(o.y0).at(0);
  const long y0_units = std::lround(y0);
  PolicyPtr policy;
  if (o.policy == "static") {
    policy = static_policy(model, y0 / static_cast<double>(o.horizon));
  } else if (o.policy == "resolving") {
    policy = resolving_policy(model);
  } else if (o.policy == "dp") {
    policy = dp_policy(model, std::make_shared<const ValueTable>(solve_dp(model, o.horizon, y0_units)));
  } else {
    throw ConfigError("simulate: policy must be static, resolving or dp");
  }
  const auto trace = simulate(model, *policy, o.horizon, y0, o.seed.value_or(1));
  emit(o.out, [&](std::ostream& os) { write_trace_csv(os, trace); });
  return 0;
}

int estimate_regret_cmd(const Options& o) {
  auto config = experiment_from_json(read_json_file(o.config));
  if (o.replications) config.replications = *o.replications;
  if (o.seed) config.base_seed = *o.seed;
  guard_large(config.horizons, o.sliced_dp);
  const auto reports = run_experiment(config);
  const std::string out = o.out.empty() ? config.output : o.out;
  emit(out, [&](std::ostream& os) { write_regret_csv(os, reports); });
  return 0;
}

int table2_cmd(const Options& o) {
  const auto reports = run_table2(log2_grid(o.min_log2, o.max_log2), o.sliced_dp);
  std::cerr << format_table2(reports);
  emit(o.out, [&](std::ostream& os) { write_regret_csv(os, reports); });
  return 0;
}

int sweep_cmd(const Options& o) {
  SweepKind kind;
  if (o.sweep_kind == "gap") {
    kind = SweepKind::gap;
  } else if (o.sweep_kind == "concavity") {
    kind = SweepKind::concavity;
  } else {
    throw ConfigError("sweep kind must be gap or concavity");
  }
  const auto config = SweepConfig::defaults(kind, o.min_log2, o.max_log2);
  guard_large(config.horizons, o.sliced_dp);
  const auto curves = run_sweep(config);
  emit(o.out, [&](std::ostream& os) { write_sweep_csv(os, kind, curves); });
  return 0;
}

int ho_compare_cmd(const Options& o) {
  const auto model = demand_model_from_json(read_json_file(o.config));
  const auto points = run_ho_compare(model, log2_grid(o.min_log2, o.max_log2), o.x_T,
                                     o.replications.value_or(10000), o.seed.value_or(1));
  emit(o.out, [&](std::ostream& os) { write_ho_csv(os, points); });
  return 0;
}

int validate_model_cmd(const Options& o) {
  const auto model = any_model_from_json(read_json_file(o.config));
  json report;
  if (const auto* single = std::get_if<DemandModel>(&model)) {
    // Construction already enforced the structural checks.
    const auto c = assumption_constants(*single);
    report = {{"valid", true},
              {"kind", to_string(single->kind())},
              {"m", c.m},
              {"M", c.M},
              {"C", c.C},
              {"B_xi", c.B_xi},
              {"L", c.L},
              {"sigma_sq", c.sigma_sq}};
  } else {
    const auto r = validate_multi(std::get<MultiModel>(model));
    report = {{"valid", r.valid},
              {"violations", r.violations},
              {"m_prime", r.m_prime},
              {"spectral_norm", r.spectral_norm}};
  }
  emit(o.out, [&](std::ostream& os) { os << report.dump(2) << "\n"; });
  return report["valid"].get<bool>() ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Price-based revenue management: fluid, DP and re-solving benchmarks"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", o.out, "Output path (default: stdout)");
    cmd->add_option("--seed", o.seed, "Base seed");
  };

  auto* fluid = app.add_subcommand("fluid-solve", "Solve the fluid model for one inventory vector");
  fluid->add_option("--config", o.config, "Model JSON")->required();
  fluid->add_option("--inventory", o.inventory, "Normalized inventory, comma separated")->required();
  add_common(fluid);

  auto* dp = app.add_subcommand("dp-value", "Optimal expected revenue V[T][y0]");
  dp->add_option("--config", o.config, "Model JSON")->required();
  dp->add_option("--T", o.horizon, "Horizon")->required()->check(CLI::PositiveNumber);
  dp->add_option("--y0", o.y0, "Initial inventory (y1,y2 for two products)")->required();
  dp->add_option("--dump-actions", o.dump_actions, "Write the action table as CSV");
  add_common(dp);

  auto* sim = app.add_subcommand("simulate", "Simulate one sample path and write its trace");
  sim->add_option("--config", o.config, "Model JSON")->required();
  sim->add_option("--policy", o.policy, "static, resolving or dp");
  sim->add_option("--T", o.horizon, "Horizon")->required()->check(CLI::PositiveNumber);
  sim->add_option("--y0", o.y0, "Initial inventory")->required();
  add_common(sim);

  auto* est = app.add_subcommand("estimate-regret", "Run an experiment config and write regret CSV");
  est->add_option("--config", o.config, "Experiment JSON")->required();
  est->add_option("--replications", o.replications, "Override replications");
  est->add_flag("--sliced-dp", o.sliced_dp, "Allow T > 2^15");
  add_common(est);

  auto* t2 = app.add_subcommand("table2", "Regret of fluid, static and re-solving vs DP");
  t2->add_option("--min-log2T", o.min_log2, "Smallest log2 T");
  t2->add_option("--max-log2T", o.max_log2, "Largest log2 T");
  t2->add_flag("--sliced-dp", o.sliced_dp, "Allow T > 2^15");
  add_common(t2);

  auto* sw = app.add_subcommand("sweep", "Re-solving regret curves over a parameter sweep");
  sw->add_option("--kind", o.sweep_kind, "gap or concavity");
  sw->add_option("--min-log2T", o.min_log2, "Smallest log2 T");
  sw->add_option("--max-log2T", o.max_log2, "Largest log2 T");
  sw->add_flag("--sliced-dp", o.sliced_dp, "Allow T > 2^15");
  add_common(sw);

  auto* ho = app.add_subcommand("ho-compare", "Hindsight-optimum value vs the fluid bound");
  ho->add_option("--config", o.config, "Additive model JSON")->required();
  ho->add_option("--x-T", o.x_T, "Normalized initial inventory");
  ho->add_option("--min-log2T", o.min_log2, "Smallest log2 T");
  ho->add_option("--max-log2T", o.max_log2, "Largest log2 T");
  ho->add_option("--replications", o.replications, "Replications per T");
  add_common(ho);

  auto* val = app.add_subcommand("validate-model", "Check model assumptions and print constants");
  val->add_option("--config", o.config, "Model JSON")->required();
  add_common(val);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*fluid) return fluid_solve(o);
    if (*dp) return dp_value_cmd(o);
    if (*sim) return simulate_cmd(o);
    if (*est) return estimate_regret_cmd(o);
    if (*t2) return table2_cmd(o);
    if (*sw) return sweep_cmd(o);
    if (*ho) return ho_compare_cmd(o);
    if (*val) return validate_model_cmd(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const ResourceError& e) {
    std::cerr << "resource guard: " << e.what() << "\n";
    return kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
