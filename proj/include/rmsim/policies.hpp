#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmsim/demand.hpp"

namespace rmsim {

struct PolicyDecision {
  double price = kShutOffPrice;
  double demand_rate = 0.0;
  bool shut_off = true;
};

// Decision that prices the given demand rate, or the shut-off decision when
// no inventory is left.
PolicyDecision decision_for_rate(const DemandModel& model, double rate);
PolicyDecision shut_off_decision();

// Deterministic state-feedback pricing policy: the decision depends only on
// the remaining inventory and the number of remaining periods.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual PolicyDecision decide(double inventory, long remaining) const = 0;

  // Demand rates for the integer inventories y_lo, y_lo + 1, ... (all >= 1)
  // with `remaining` periods to go. The default calls decide() per state.
  virtual void fill_rates(long remaining, long y_lo, Eigen::Ref<Eigen::ArrayXd> out) const;
};

using PolicyPtr = std::shared_ptr<const Policy>;

// p = f^{-1}(min(x_T, x^u)) whenever inventory is positive.
PolicyPtr static_policy(const DemandModel& model, double x_T);

// Re-solves the fluid model at x_t = y/t every period.
PolicyPtr resolving_policy(const DemandModel& model);
PolicyDecision resolving_decision(const DemandModel& model, double inventory, long remaining);

struct HindsightInfo {
  double xi_bar = 0.0;  // realized mean noise over the horizon
};

// Clairvoyant fixed price f^{-1}(clip(x_T + xi_bar)); additive noise only.
PolicyPtr ho_policy(const DemandModel& model, double x_T, HindsightInfo info);

// Optimal revenue-to-go V(y, t) and maximizing demand rates for integer
// inventory under Bernoulli unit sales. Column t is the slice with t
// periods remaining.
struct ValueTable {
  long horizon = 0;
  long max_inventory = 0;
  Eigen::MatrixXd values;   // (max_inventory + 1) x (horizon + 1)
  Eigen::MatrixXd actions;  // same shape; zero where y == 0 or t == 0

  double value(long remaining, long inventory) const { return values(inventory, remaining); }
  double action(long remaining, long inventory) const { return actions(inventory, remaining); }
};

// Dense tables above this many entries are refused; use the sliced
// evaluators instead.
inline constexpr long kMaxDenseEntries = 1L << 25;

ValueTable solve_dp(const DemandModel& model, long horizon, long initial_inventory);

// Plays the maximizing actions of a value table.
PolicyPtr dp_policy(const DemandModel& model, std::shared_ptr<const ValueTable> table);

// Optimal demand rate of one Bellman step, given V(y-1, t-1) and V(y, t-1).
double dp_step_action(const DemandModel& model, double value_after_sale, double value_no_sale);

double evaluate_policy_exact(const DemandModel& model, const Policy& policy, long horizon,
                             long initial_inventory);

struct ExactEvaluation {
  double dp_value = 0.0;
  std::vector<double> policy_values;
};

// One backward pass keeping two time slices: the optimal value (unless
// include_dp is false) and the exact value of each policy at
// (horizon, initial_inventory). Only inventories reachable from the initial
// state are visited.
ExactEvaluation evaluate_exact(const DemandModel& model, long horizon, long initial_inventory,
                               std::span<const PolicyPtr> policies, bool include_dp = true);

// Optimal value at (horizon, initial_inventory) without storing tables.
double dp_value(const DemandModel& model, long horizon, long initial_inventory);

}  // namespace rmsim
