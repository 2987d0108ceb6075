#include "rmsim/multi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "rmsim/demand.hpp"
#include "rmsim/errors.hpp"
#include "rmsim/fluid.hpp"

namespace rmsim {

namespace {

void require_two_products(const MultiModel& model) {
  if (model.size() != 2) {
    throw UnsupportedError(fmt::format("exact multi-product DP supports n = 2 only (n = {})",
                                       model.size()));
  }
  const auto report = validate_multi(model);
  if (!report.valid) throw ValidationError(report.violations);
}

class ResolvingMulti final : public MultiPolicy {
 public:
  explicit ResolvingMulti(const MultiModel& model) : model_(model) {}
  std::string name() const override { return "resolving"; }
  MultiDecision decide(const Eigen::VectorXd& inventory, long remaining) const override {
    return resolving_multi_decision(model_, inventory, remaining);
  }

 private:
  MultiModel model_;
};

class DpMulti final : public MultiPolicy {
 public:
  DpMulti(const MultiModel& model, std::shared_ptr<const MultiValueTable> table)
      : model_(model), table_(std::move(table)) {}
  std::string name() const override { return "dp"; }
  MultiDecision decide(const Eigen::VectorXd& inventory, long remaining) const override {
    const long y1 = std::lround(inventory[0]);
    const long y2 = std::lround(inventory[1]);
    if (remaining < 1 || remaining > table_->horizon || y1 < 0 || y2 < 0 ||
        y1 > table_->max_inventory[0] || y2 > table_->max_inventory[1]) {
      throw DomainError(fmt::format("dp policy: state ({}, {}, t = {}) outside the value table", y1,
                                    y2, remaining));
    }
    const Eigen::Vector2d rates(table_->rate1[remaining](y1, y2), table_->rate2[remaining](y1, y2));
    return multi_decision_for_rates(model_, rates, inventory);
  }

 private:
  MultiModel model_;
  std::shared_ptr<const MultiValueTable> table_;
};

// Exact maximizer of a 2-D quadratic over a box when the Hessian is
// indefinite but has a negative diagonal: the optimum lies on an edge.
Eigen::Vector2d enumerate_box_2d(const Eigen::Matrix2d& q, const Eigen::Vector2d& lin,
                                 const Eigen::Vector2d& upper) {
  auto objective = [&](const Eigen::Vector2d& d) { return lin.dot(d) + 0.5 * d.dot(q * d); };
  Eigen::Vector2d best = Eigen::Vector2d::Zero();
  double best_value = objective(best);
  auto consider = [&](const Eigen::Vector2d& d) {
    const double v = objective(d);
    if (v > best_value) {
      best_value = v;
      best = d;
    }
  };
  for (int fixed = 0; fixed < 2; ++fixed) {
    const int moving = 1 - fixed;
    for (double bound : {0.0, upper[fixed]}) {
      Eigen::Vector2d d;
      d[fixed] = bound;
      d[moving] = std::clamp(-(lin[moving] + q(moving, fixed) * bound) / q(moving, moving), 0.0,
                             upper[moving]);
      consider(d);
    }
  }
  return best;
}

}  // namespace

MultiDecision multi_decision_for_rates(const MultiModel& model, const Eigen::VectorXd& rates,
                                       const Eigen::VectorXd& inventory) {
  const auto n = model.size();
  MultiDecision out;
  out.shut_off.assign(n, false);
  out.demand_rate = rates;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (inventory[k] <= 0.0) {
      out.shut_off[k] = true;
      out.demand_rate[k] = 0.0;
    }
  }
  out.price = model.prices(out.demand_rate);
  for (Eigen::Index k = 0; k < n; ++k)
    if (out.shut_off[k]) out.price[k] = kShutOffPrice;
  return out;
}

MultiDecision resolving_multi_decision(const MultiModel& model, const Eigen::VectorXd& inventory,
                                       long remaining) {
  if (remaining < 1) throw DomainError("resolving policy: no periods remaining");
  const Eigen::VectorXd x = inventory.cwiseMax(0.0) / static_cast<double>(remaining);
  // A degenerate active set does not change the decision.
  const auto sol = solve_fluid_multi(model, x);
  return multi_decision_for_rates(model, sol.x_c, inventory);
}

MultiPolicyPtr resolving_multi_policy(const MultiModel& model) {
  return std::make_shared<ResolvingMulti>(model);
}

MultiStepResult multi_bellman_step(const MultiModel& model, const Eigen::Vector2d& upper,
                                   double v00, double v10, double v01, double v11) {
  const double cross = v11 - v10 - v01 + v00;
  Eigen::Matrix2d q = model.H;
  q(0, 1) += cross;
  q(1, 0) += cross;
  const Eigen::Vector2d lin = model.g + Eigen::Vector2d(v10 - v00, v01 - v00);

  MultiStepResult out;
  out.concave = q(0, 0) < 0.0 && q.determinant() > 0.0;
  if (out.concave) {
    out.rates = maximize_box_qp<double>(q, lin, Eigen::Vector2d::Zero(), upper).x;
  } else {
    out.rates = enumerate_box_2d(q, lin, upper);
  }
  out.value = v00 + lin.dot(out.rates) + 0.5 * out.rates.dot(q * out.rates);
  return out;
}

MultiValueTable solve_dp_multi(const MultiModel& model, long horizon,
                               std::array<long, 2> initial_inventory) {
  require_two_products(model);
  const auto [y1max, y2max] = initial_inventory;
  if (horizon < 0 || y1max < 0 || y2max < 0) throw DomainError("solve_dp_multi: negative state");
  const double states = double(horizon + 1) * double(y1max + 1) * double(y2max + 1);
  if (states > double(kMaxMultiStates)) {
    throw UnsupportedError(fmt::format("solve_dp_multi: {} states exceed the limit of {}", states,
                                       kMaxMultiStates));
  }
  MultiValueTable table;
  table.horizon = horizon;
  table.max_inventory = initial_inventory;
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(y1max + 1, y2max + 1);
  table.values.assign(horizon + 1, zero);
  table.rate1.assign(horizon + 1, zero);
  table.rate2.assign(horizon + 1, zero);
  for (long t = 1; t <= horizon; ++t) {
    const auto& prev = table.values[t - 1];
    for (long y1 = 0; y1 <= y1max; ++y1) {
      for (long y2 = 0; y2 <= y2max; ++y2) {
        const Eigen::Vector2d upper(y1 > 0 ? model.box_hi[0] : 0.0, y2 > 0 ? model.box_hi[1] : 0.0);
        const long s1 = y1 > 0 ? y1 - 1 : y1;
        const long s2 = y2 > 0 ? y2 - 1 : y2;
        const auto step =
            multi_bellman_step(model, upper, prev(y1, y2), prev(s1, y2), prev(y1, s2), prev(s1, s2));
        if (!step.concave) ++table.indefinite_steps;
        table.values[t](y1, y2) = step.value;
        table.rate1[t](y1, y2) = step.rates[0];
        table.rate2[t](y1, y2) = step.rates[1];
      }
    }
  }
  return table;
}

MultiPolicyPtr dp_multi_policy(const MultiModel& model,
                               std::shared_ptr<const MultiValueTable> table) {
  if (!table) throw std::invalid_argument("dp_multi_policy: null table");
  return std::make_shared<DpMulti>(model, std::move(table));
}

double evaluate_policy_exact_multi(const MultiModel& model, const MultiPolicy& policy, long horizon,
                                   std::array<long, 2> initial_inventory) {
  require_two_products(model);
  const auto [y1max, y2max] = initial_inventory;
  Eigen::MatrixXd prev = Eigen::MatrixXd::Zero(y1max + 1, y2max + 1), next = prev;
  for (long t = 1; t <= horizon; ++t) {
    for (long y1 = 0; y1 <= y1max; ++y1) {
      for (long y2 = 0; y2 <= y2max; ++y2) {
        const auto decision = policy.decide(Eigen::Vector2d(double(y1), double(y2)), t);
        const double d1 = decision.demand_rate[0];
        const double d2 = decision.demand_rate[1];
        const long s1 = y1 > 0 ? y1 - 1 : y1;
        const long s2 = y2 > 0 ? y2 - 1 : y2;
        next(y1, y2) = model.revenue(decision.demand_rate) +
                       (1 - d1) * (1 - d2) * prev(y1, y2) + d1 * (1 - d2) * prev(s1, y2) +
                       (1 - d1) * d2 * prev(y1, s2) + d1 * d2 * prev(s1, s2);
      }
    }
    std::swap(prev, next);
  }
  return prev(y1max, y2max);
}

}  // namespace rmsim
