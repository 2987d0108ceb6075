#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rmsim/demand.hpp"
#include "rmsim/multi.hpp"
#include "rmsim/policies.hpp"
#include "rmsim/stats.hpp"

namespace rmsim {

// Per-period record of one sample path. Entry i is the period with
// tau = horizon - i periods remaining (tau runs T, T-1, ..., 1).
struct SimTrace {
  long horizon = 0;
  double initial_inventory = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> price;
  std::vector<double> demand_rate;
  std::vector<double> xi;
  std::vector<double> realized_demand;
  std::vector<double> inventory_after;
  std::vector<double> revenue;
  double total_revenue = 0.0;

  long tau(std::size_t i) const { return horizon - static_cast<long>(i); }
  std::size_t index_of(long tau) const { return static_cast<std::size_t>(horizon - tau); }
  // Inventory at the start of the period with `tau` periods remaining.
  double inventory_before(long tau) const;
  double units_sold() const { return initial_inventory - (inventory_after.empty() ? initial_inventory : inventory_after.back()); }
};

// Runs the inventory dynamics forward under `policy`. The period with tau
// periods remaining consumes uniform draw tau of the counter-based stream
// keyed by `seed`, so two policies run with the same seed share their
// random numbers.
SimTrace simulate(const DemandModel& model, const Policy& policy, long horizon,
                  double initial_inventory, std::uint64_t seed);

// Two policies on common random numbers.
std::pair<SimTrace, SimTrace> simulate_common(const DemandModel& model, const Policy& a,
                                              const Policy& b, long horizon,
                                              double initial_inventory, std::uint64_t seed);

struct Diagnostics {
  // xi_bar[t] = sum_{tau > t} xi_tau / (tau - 1) for t = 1..T; index 0 unused.
  std::vector<double> xi_bar;
  double gamma = 0.0;
  long t_sharp = 2;
};

// min(x_T - d_lo, x^u - x_T, -r'(x_T) / r''(x_T))
double stopping_threshold(const DemandModel& model, double x_T);

Diagnostics diagnostics(const SimTrace& trace, const DemandModel& model, double x_T);

// Residual of the telescoping identity on harmonic series of demand
// corrections and noise differences. Sequences are indexed
// tau = T, T-1, ..., t_sharp (element 0 is tau = T).
double harmonic_identity_check(long t_sharp, std::span<const double> delta,
                               std::span<const double> xi_r, std::span<const double> xi_star);

// Monte Carlo estimate of a policy's expected revenue; replication i uses
// replication_seed(base_seed, i).
SampleSummary mc_policy_value(const DemandModel& model, const Policy& policy, long horizon,
                              double initial_inventory, long replications, std::uint64_t base_seed,
                              double level = 0.95);

// Estimate of E[revenue(a) - revenue(b)], optionally on common random numbers.
SampleSummary mc_value_difference(const DemandModel& model, const Policy& a, const Policy& b,
                                  long horizon, double initial_inventory, long replications,
                                  std::uint64_t base_seed, bool common_random_numbers,
                                  double level = 0.95);

// Upper bound on the DP-vs-resolving regret assembled from the assumption
// constants, with the stopping-time term bounded by 1 + 4 B^4 / gamma^4.
struct ConstantBound {
  double smoothness_term = 0.0;  // M^2 B^4 / (2m)
  double coupling_term = 0.0;    // 2 (|r''| L B)^2 / m
  double curvature_term = 0.0;   // 3 |r''| B^2
  double stopping_term = 0.0;    // r(x^u) (E[T#] - 1)
  double gamma = 0.0;
  double total() const { return smoothness_term + coupling_term + curvature_term + stopping_term; }
};

ConstantBound constant_bound(const DemandModel& model, double x_T);

// Hindsight-optimum revenue for one realized mean noise, T r(clip(x_T + xi_bar)).
double ho_revenue(const DemandModel& model, double x_T, long horizon, double xi_bar);

// Draws xi_bar for replication `seed` as the mean of `horizon` i.i.d. noise draws.
double sample_xi_bar(const DemandModel& model, long horizon, std::uint64_t seed);

struct PolicyValue {
  std::string policy;
  double value = 0.0;
  double ci_half_width = 0.0;
  std::optional<double> regret_vs_dp;
  double regret_vs_fluid = 0.0;
};

struct RegretReport {
  long horizon = 0;
  long initial_inventory = 0;
  double fluid_value = 0.0;
  std::optional<double> dp_value;
  std::string dp_omitted_reason;  // set when dp_value is empty
  bool exact = false;
  long replications = 0;
  std::uint64_t base_seed = 0;
  std::vector<PolicyValue> rows;

  const PolicyValue& row(const std::string& policy) const;
};

// T r(min(y0/T, x^u)) via the fluid solution.
double fluid_value(const DemandModel& model, long horizon, double initial_inventory);

// Bernoulli models are evaluated exactly (replications ignored, CI width 0);
// other models by Monte Carlo. Recognized policies: fluid, static,
// resolving, dp, ho.
std::vector<RegretReport> estimate_regret(const DemandModel& model, std::span<const long> horizons,
                                          const std::function<long(long)>& y0_rule,
                                          std::span<const std::string> policies, long replications,
                                          std::uint64_t base_seed, double level = 0.95);

// Multi-product sample path; returns the total revenue.
struct MultiSimTrace {
  long horizon = 0;
  std::uint64_t seed = 0;
  std::vector<double> revenue;
  std::vector<Eigen::VectorXd> inventory_after;
  double total_revenue = 0.0;
};

MultiSimTrace simulate_multi(const MultiModel& model, const MultiPolicy& policy, long horizon,
                             const Eigen::VectorXd& initial_inventory, std::uint64_t seed);

SampleSummary mc_multi_value(const MultiModel& model, const MultiPolicy& policy, long horizon,
                             const Eigen::VectorXd& initial_inventory, long replications,
                             std::uint64_t base_seed, double level = 0.95);

}  // namespace rmsim
