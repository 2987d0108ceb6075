#pragma once

// Multi-product pricing: re-solving policy and exact two-product DP under
// independent per-product unit sales.

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmsim/quadratic.hpp"

namespace rmsim {

using MultiModel = MultiDemandModel<double>;

struct MultiDecision {
  Eigen::VectorXd price;        // +inf for shut-off products
  Eigen::VectorXd demand_rate;  // zero for shut-off products
  std::vector<bool> shut_off;
};

// Prices the demand-rate vector; products with no inventory are shut off.
MultiDecision multi_decision_for_rates(const MultiModel& model, const Eigen::VectorXd& rates,
                                       const Eigen::VectorXd& inventory);

class MultiPolicy {
 public:
  virtual ~MultiPolicy() = default;
  virtual std::string name() const = 0;
  virtual MultiDecision decide(const Eigen::VectorXd& inventory, long remaining) const = 0;
};

using MultiPolicyPtr = std::shared_ptr<const MultiPolicy>;

// Prices at f^{-1}(x^c_t) where x^c_t solves the fluid model at y / t.
MultiDecision resolving_multi_decision(const MultiModel& model, const Eigen::VectorXd& inventory,
                                       long remaining);
MultiPolicyPtr resolving_multi_policy(const MultiModel& model);

// Two-product value/action tables; values[t](y1, y2).
struct MultiValueTable {
  long horizon = 0;
  std::array<long, 2> max_inventory{0, 0};
  std::vector<Eigen::MatrixXd> values;
  std::vector<Eigen::MatrixXd> rate1;
  std::vector<Eigen::MatrixXd> rate2;
  long indefinite_steps = 0;  // inner problems solved by enumeration

  double value(long remaining, long y1, long y2) const { return values[remaining](y1, y2); }
};

inline constexpr long kMaxMultiStates = 10'000'000;

// One Bellman step at a state: maximizes
//   r(d) + sum_s P(s | d) V(y - s)
// over d in [0, ub] with ub_k = 0 when product k has no inventory.
struct MultiStepResult {
  Eigen::Vector2d rates;
  double value = 0.0;
  bool concave = true;
};
MultiStepResult multi_bellman_step(const MultiModel& model, const Eigen::Vector2d& upper,
                                   double v00, double v10, double v01, double v11);

MultiValueTable solve_dp_multi(const MultiModel& model, long horizon,
                               std::array<long, 2> initial_inventory);

MultiPolicyPtr dp_multi_policy(const MultiModel& model, std::shared_ptr<const MultiValueTable> table);

// Exact expected revenue of a state-feedback policy over the integer
// inventory lattice (n = 2).
double evaluate_policy_exact_multi(const MultiModel& model, const MultiPolicy& policy, long horizon,
                                   std::array<long, 2> initial_inventory);

}  // namespace rmsim
