#include "rmsim/policies.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rmsim/errors.hpp"
#include "rmsim/fluid.hpp"

namespace rmsim {

namespace {

void require_bernoulli(const DemandModel& model, const char* what) {
  if (!model.is_bernoulli()) {
    throw UnsupportedError(std::string(what) + " requires Bernoulli unit sales");
  }
}

void require_state(long horizon, long initial_inventory) {
  if (horizon < 0 || initial_inventory < 0) {
    throw DomainError(fmt::format("invalid state (T = {}, y0 = {})", horizon, initial_inventory));
  }
}

class StaticPolicy final : public Policy {
 public:
  StaticPolicy(const DemandModel& model, double rate)
      : decision_(decision_for_rate(model, rate)) {}
  std::string name() const override { return "static"; }
  PolicyDecision decide(double inventory, long) const override {
    return inventory > 0.0 ? decision_ : shut_off_decision();
  }
  void fill_rates(long, long, Eigen::Ref<Eigen::ArrayXd> out) const override {
    out.setConstant(decision_.demand_rate);
  }

 private:
  PolicyDecision decision_;
};

class ResolvingPolicy final : public Policy {
 public:
  explicit ResolvingPolicy(const DemandModel& model) : model_(model) {}
  std::string name() const override { return "resolving"; }
  PolicyDecision decide(double inventory, long remaining) const override {
    return resolving_decision(model_, inventory, remaining);
  }
  void fill_rates(long remaining, long y_lo, Eigen::Ref<Eigen::ArrayXd> out) const override {
    // Same min rule as solve_fluid_single, over a contiguous block of states.
    const double t = static_cast<double>(remaining);
    const double xu = model_.unconstrained_optimum();
    const double d_lo = model_.interval().d_lo;
    out = (Eigen::ArrayXd::LinSpaced(out.size(), static_cast<double>(y_lo),
                                     static_cast<double>(y_lo + out.size() - 1)) /
           t)
              .max(d_lo)
              .min(xu);
  }

 private:
  DemandModel model_;
};

class DpPolicy final : public Policy {
 public:
  DpPolicy(const DemandModel& model, std::shared_ptr<const ValueTable> table)
      : model_(model), table_(std::move(table)) {}
  std::string name() const override { return "dp"; }
  PolicyDecision decide(double inventory, long remaining) const override {
    if (inventory <= 0.0) return shut_off_decision();
    const long y = std::lround(inventory);
    if (std::abs(inventory - static_cast<double>(y)) > 1e-9 || y > table_->max_inventory ||
        remaining < 1 || remaining > table_->horizon) {
      throw DomainError(fmt::format("dp policy: state (y = {}, t = {}) outside the value table",
                                    inventory, remaining));
    }
    return decision_for_rate(model_, table_->action(remaining, y));
  }
  void fill_rates(long remaining, long y_lo, Eigen::Ref<Eigen::ArrayXd> out) const override {
    if (remaining > table_->horizon || y_lo + out.size() - 1 > table_->max_inventory) {
      throw DomainError("dp policy: evaluation range exceeds the value table");
    }
    out = table_->actions.col(remaining).segment(y_lo, out.size()).array();
  }

 private:
  DemandModel model_;
  std::shared_ptr<const ValueTable> table_;
};

// One Bellman step on a block of inventories: value given per-state rates,
// with `below` = V(y-1, t-1) and `same` = V(y, t-1).
template <typename Rates, typename Below, typename Same>
auto bellman_value(const DemandModel& model, const Rates& d, const Below& below, const Same& same) {
  return d * (model.alpha() - d) / model.beta() + d * below + (1.0 - d) * same;
}

template <typename Below, typename Same>
Eigen::ArrayXd optimal_rates(const DemandModel& model, const Below& below, const Same& same) {
  const auto& iv = model.interval();
  return ((model.alpha() + model.beta() * (below - same)) / 2.0).max(iv.d_lo).min(iv.d_hi);
}

}  // namespace

PolicyDecision decision_for_rate(const DemandModel& model, double rate) {
  return PolicyDecision{model.inverse_demand(rate), rate, false};
}

PolicyDecision shut_off_decision() { return PolicyDecision{}; }

void Policy::fill_rates(long remaining, long y_lo, Eigen::Ref<Eigen::ArrayXd> out) const {
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    out[k] = decide(static_cast<double>(y_lo + k), remaining).demand_rate;
  }
}

PolicyPtr static_policy(const DemandModel& model, double x_T) {
  if (!(x_T > 0.0)) throw DomainError("static policy requires x_T > 0");
  return std::make_shared<StaticPolicy>(model, solve_fluid_single(model, x_T).x_c[0]);
}

PolicyPtr resolving_policy(const DemandModel& model) {
  return std::make_shared<ResolvingPolicy>(model);
}

PolicyDecision resolving_decision(const DemandModel& model, double inventory, long remaining) {
  if (remaining < 1) throw DomainError("resolving policy: no periods remaining");
  if (inventory <= 0.0) return shut_off_decision();
  const auto sol = solve_fluid_single(model, inventory / static_cast<double>(remaining));
  return decision_for_rate(model, sol.x_c[0]);
}

PolicyPtr ho_policy(const DemandModel& model, double x_T, HindsightInfo info) {
  if (model.is_bernoulli()) {
    throw UnsupportedError(
        "hindsight-optimum policy needs price-independent additive noise; Bernoulli noise is "
        "price dependent");
  }
  if (std::abs(info.xi_bar) > model.noise_half_width() + 1e-12) {
    throw DomainError("hindsight info: |xi_bar| exceeds the noise bound");
  }
  const auto& iv = model.interval();
  const double rate = std::clamp(x_T + info.xi_bar, iv.d_lo, iv.d_hi);
  class Ho final : public Policy {
   public:
    explicit Ho(PolicyDecision d) : d_(d) {}
    std::string name() const override { return "ho"; }
    PolicyDecision decide(double inventory, long) const override {
      return inventory > 0.0 ? d_ : shut_off_decision();
    }

   private:
    PolicyDecision d_;
  };
  return std::make_shared<Ho>(decision_for_rate(model, rate));
}

double dp_step_action(const DemandModel& model, double value_after_sale, double value_no_sale) {
  const auto& iv = model.interval();
  return std::clamp((model.alpha() + model.beta() * (value_after_sale - value_no_sale)) / 2.0,
                    iv.d_lo, iv.d_hi);
}

ValueTable solve_dp(const DemandModel& model, long horizon, long initial_inventory) {
  require_bernoulli(model, "exact DP");
  require_state(horizon, initial_inventory);
  if ((horizon + 1) * (initial_inventory + 1) > kMaxDenseEntries) {
    throw ResourceError(fmt::format(
        "dense value table for T = {}, y0 = {} exceeds {} entries; use the sliced evaluator",
        horizon, initial_inventory, kMaxDenseEntries));
  }
  ValueTable table;
  table.horizon = horizon;
  table.max_inventory = initial_inventory;
  table.values = Eigen::MatrixXd::Zero(initial_inventory + 1, horizon + 1);
  table.actions = Eigen::MatrixXd::Zero(initial_inventory + 1, horizon + 1);
  const Eigen::Index n = initial_inventory;
  if (n == 0) return table;
  for (long t = 1; t <= horizon; ++t) {
    const auto below = table.values.col(t - 1).segment(0, n).array();
    const auto same = table.values.col(t - 1).segment(1, n).array();
    const Eigen::ArrayXd d = optimal_rates(model, below, same);
    table.values.col(t).segment(1, n) = bellman_value(model, d, below, same).matrix();
    table.actions.col(t).segment(1, n) = d.matrix();
  }
  return table;
}

PolicyPtr dp_policy(const DemandModel& model, std::shared_ptr<const ValueTable> table) {
  if (!table) throw std::invalid_argument("dp_policy: null table");
  return std::make_shared<DpPolicy>(model, std::move(table));
}

ExactEvaluation evaluate_exact(const DemandModel& model, long horizon, long initial_inventory,
                               std::span<const PolicyPtr> policies, bool include_dp) {
  require_bernoulli(model, "exact policy evaluation");
  require_state(horizon, initial_inventory);
  const long y0 = initial_inventory;
  const std::size_t np = policies.size();
  ExactEvaluation out;
  out.policy_values.assign(np, 0.0);
  if (y0 == 0 || horizon == 0) return out;

  // Slices are indexed by inventory 0..y0; entries below the reachable
  // window are never read.
  Eigen::ArrayXd dp_prev = Eigen::ArrayXd::Zero(y0 + 1), dp_next = dp_prev;
  std::vector<Eigen::ArrayXd> prev(np, Eigen::ArrayXd::Zero(y0 + 1)), next = prev;
  Eigen::ArrayXd rates(y0);
  for (long t = 1; t <= horizon; ++t) {
    const long lo = std::max(1L, y0 - (horizon - t));
    const Eigen::Index len = y0 - lo + 1;
    if (include_dp) {
      const auto below = dp_prev.segment(lo - 1, len);
      const auto same = dp_prev.segment(lo, len);
      const Eigen::ArrayXd d = optimal_rates(model, below, same);
      dp_next.segment(lo, len) = bellman_value(model, d, below, same);
    }
    for (std::size_t k = 0; k < np; ++k) {
      auto block = rates.head(len);
      policies[k]->fill_rates(t, lo, block);
      const auto below = prev[k].segment(lo - 1, len);
      const auto same = prev[k].segment(lo, len);
      next[k].segment(lo, len) = bellman_value(model, block, below, same);
    }
    if (include_dp) std::swap(dp_prev, dp_next);
    std::swap(prev, next);
  }
  out.dp_value = dp_prev[y0];
  for (std::size_t k = 0; k < np; ++k) out.policy_values[k] = prev[k][y0];
  return out;
}

double evaluate_policy_exact(const DemandModel& model, const Policy& policy, long horizon,
                             long initial_inventory) {
  // Non-owning handle; the evaluation does not outlive `policy`.
  const PolicyPtr handle(std::shared_ptr<const Policy>{}, &policy);
  return evaluate_exact(model, horizon, initial_inventory, std::span(&handle, 1), false)
      .policy_values[0];
}

double dp_value(const DemandModel& model, long horizon, long initial_inventory) {
  return evaluate_exact(model, horizon, initial_inventory, {}).dp_value;
}

}  // namespace rmsim
