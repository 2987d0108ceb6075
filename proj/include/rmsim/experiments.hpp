#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rmsim/demand.hpp"
#include "rmsim/json_io.hpp"
#include "rmsim/sim.hpp"

namespace rmsim {

// Initial-inventory rule y0 = round(c T) with exact rational c = num / den.
// Halves round up.
class Y0Rule {
 public:
  Y0Rule(std::int64_t num, std::int64_t den);
  static Y0Rule parse(const std::string& text);  // "round(5/16*T)", "round(0.375*T)"

  long operator()(long horizon) const;
  std::string to_string() const;  // canonical "round(num/den*T)"
  double ratio() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  bool operator==(const Y0Rule&) const = default;

 private:
  std::int64_t num_;
  std::int64_t den_;
};

struct ExperimentConfig {
  std::string name = "experiment";
  json model;
  std::vector<long> horizons;
  Y0Rule y0_rule{5, 16};
  std::vector<std::string> policies;  // subset of {static, resolving, dp, ho}
  long replications = 1000;
  std::uint64_t base_seed = 1;
  std::string output;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig experiment_from_json(const json& j);
json to_json(const ExperimentConfig& config);

// Reference single-product instance: f(p) = 3/4 - p/2 on
// p in [0, 1] with Bernoulli sales, x_T = 5/16.
DemandModel reference_model();
inline constexpr long kTable2SlicedThreshold = 1L << 15;

std::vector<RegretReport> run_experiment(const ExperimentConfig& config);

// Fluid, static and re-solving regret against the optimal DP, evaluated
// exactly. Horizons above 2^15 require allow_large.
std::vector<RegretReport> run_table2(const std::vector<long>& horizons, bool allow_large);

// Display table: one row per benchmark, one column per log2 T, two
// decimals.
std::string format_table2(const std::vector<RegretReport>& reports);

enum class SweepKind { gap, concavity };

struct SweepConfig {
  SweepKind kind = SweepKind::gap;
  std::vector<long> horizons;
  std::vector<double> values;  // x_T (gap) or a = b (concavity)

  static SweepConfig defaults(SweepKind kind, int min_log2, int max_log2);
};

struct SweepPoint {
  double parameter = 0.0;
  long horizon = 0;
  long initial_inventory = 0;
  double resolving_value = 0.0;
  double dp_value = 0.0;
  double regret = 0.0;
};

struct SweepCurve {
  double parameter = 0.0;
  std::vector<SweepPoint> points;
  bool strictly_increasing() const;
  // max regret over T >= horizon minus the regret at `horizon`
  double plateau_rise(long horizon) const;
};

// Models of the sweeps. Concavity sweep prices range over [0, 0.95] so the
// purchase probability a - b p stays positive.
DemandModel sweep_model(SweepKind kind, double parameter);
inline constexpr double kConcavitySweepInventory = 0.1;
inline constexpr double kConcavitySweepPriceCeiling = 0.95;

std::vector<SweepCurve> run_sweep(const SweepConfig& config);

struct HoPoint {
  long horizon = 0;
  double fluid_value = 0.0;
  double ho_value = 0.0;
  double ci_half_width = 0.0;
  double gap = 0.0;    // fluid - HO
  double bound = 0.0;  // (m/2) T Var(xi_bar) = (m/2) w^2 / 3
};

std::vector<HoPoint> run_ho_compare(const DemandModel& model, const std::vector<long>& horizons,
                                    double x_T, long replications, std::uint64_t seed,
                                    double level = 0.95);

// CSV writers. Doubles are printed in shortest round-trip form.
std::string csv_number(double v);
void write_regret_csv(std::ostream& out, const std::vector<RegretReport>& reports);
void write_sweep_csv(std::ostream& out, SweepKind kind, const std::vector<SweepCurve>& curves);
void write_ho_csv(std::ostream& out, const std::vector<HoPoint>& points);
void write_trace_csv(std::ostream& out, const SimTrace& trace);
void write_actions_csv(std::ostream& out, const DemandModel& model, const ValueTable& table);

inline constexpr const char* kRegretCsvHeader =
    "T,policy,value,ci_half_width,regret_vs_dp,regret_vs_fluid";
inline constexpr const char* kTraceCsvHeader =
    "tau_remaining,price,demand_rate,xi,realized_demand,inventory_after,revenue";

}  // namespace rmsim
