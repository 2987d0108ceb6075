#include "rmsim/sim.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rmsim/errors.hpp"
#include "rmsim/fluid.hpp"
#include "rmsim/rng.hpp"

namespace rmsim {

double SimTrace::inventory_before(long t) const {
  if (t < 1 || t > horizon) throw std::out_of_range("inventory_before: tau outside 1..T");
  return t == horizon ? initial_inventory : inventory_after[index_of(t + 1)];
}

SimTrace simulate(const DemandModel& model, const Policy& policy, long horizon,
                  double initial_inventory, std::uint64_t seed) {
  if (horizon < 1) throw DomainError("simulate: horizon must be >= 1");
  if (!(initial_inventory >= 0.0)) throw DomainError("simulate: initial inventory must be >= 0");
  const CounterRng rng(seed);
  SimTrace tr;
  tr.horizon = horizon;
  tr.initial_inventory = initial_inventory;
  tr.seed = seed;
  for (auto* v : {&tr.price, &tr.demand_rate, &tr.xi, &tr.realized_demand, &tr.inventory_after,
                  &tr.revenue}) {
    v->reserve(horizon);
  }
  double y = initial_inventory;
  for (long tau = horizon; tau >= 1; --tau) {
    PolicyDecision dec;
    try {
      dec = policy.decide(y, tau);
    } catch (const DomainError& e) {
      throw DomainError(fmt::format("period with {} remaining: {}", tau, e.what()));
    }
    double xi = 0.0, realized = 0.0, sold = 0.0;
    if (!dec.shut_off) {
      const double u = rng.uniform_at(static_cast<std::uint64_t>(tau));
      if (model.is_bernoulli()) {
        realized = u < dec.demand_rate ? 1.0 : 0.0;
        xi = realized - dec.demand_rate;
      } else {
        xi = model.noise_from_uniform(dec.price, u);
        realized = dec.demand_rate + xi;
      }
      sold = std::min(realized, y);
    }
    y -= sold;
    tr.price.push_back(dec.price);
    tr.demand_rate.push_back(dec.demand_rate);
    tr.xi.push_back(xi);
    tr.realized_demand.push_back(realized);
    tr.inventory_after.push_back(y);
    tr.revenue.push_back(dec.shut_off ? 0.0 : dec.price * sold);
  }
  tr.total_revenue = pairwise_sum(tr.revenue);
  return tr;
}

std::pair<SimTrace, SimTrace> simulate_common(const DemandModel& model, const Policy& a,
                                              const Policy& b, long horizon,
                                              double initial_inventory, std::uint64_t seed) {
  return {simulate(model, a, horizon, initial_inventory, seed),
          simulate(model, b, horizon, initial_inventory, seed)};
}

double stopping_threshold(const DemandModel& model, double x_T) {
  const auto& iv = model.interval();
  const double xu = model.unconstrained_optimum();
  const double curvature_gap = -model.revenue_derivative(x_T) / model.revenue_second_derivative();
  return std::min({x_T - iv.d_lo, xu - x_T, curvature_gap});
}

Diagnostics diagnostics(const SimTrace& trace, const DemandModel& model, double x_T) {
  const long T = trace.horizon;
  Diagnostics d;
  d.gamma = stopping_threshold(model, x_T);
  d.xi_bar.assign(T + 1, 0.0);
  for (long t = T - 1; t >= 1; --t) {
    d.xi_bar[t] = d.xi_bar[t + 1] + trace.xi[trace.index_of(t + 1)] / static_cast<double>(t);
  }
  d.t_sharp = 2;
  for (long tau = T; tau >= 2; --tau) {
    if (std::abs(d.xi_bar[tau - 1]) > d.gamma) {
      d.t_sharp = std::max(tau, 2L);
      break;
    }
  }
  return d;
}

double harmonic_identity_check(long t_sharp, std::span<const double> delta,
                               std::span<const double> xi_r, std::span<const double> xi_star) {
  if (delta.size() != xi_r.size() || delta.size() != xi_star.size()) {
    throw std::invalid_argument("harmonic_identity_check: sequence lengths differ");
  }
  if (t_sharp < 2) throw DomainError("harmonic_identity_check: t_sharp must be >= 2");
  if (delta.empty()) return 0.0;
  const long T = t_sharp + static_cast<long>(delta.size()) - 1;
  auto at = [&](std::span<const double> s, long tau) { return s[static_cast<std::size_t>(T - tau)]; };
  auto xi_delta = [&](long tau) { return at(xi_r, tau) - at(xi_star, tau); };

  // Harmonic series at t = T, T-1, ..., t_sharp - 1 (bar_*[T - t]).
  std::vector<double> bar_delta(delta.size() + 1, 0.0), bar_xi(delta.size() + 1, 0.0);
  for (long t = T - 1; t >= t_sharp - 1; --t) {
    const auto i = static_cast<std::size_t>(T - t);
    bar_delta[i] = bar_delta[i - 1] + at(delta, t + 1) / static_cast<double>(t);
    bar_xi[i] = bar_xi[i - 1] + xi_delta(t + 1) / static_cast<double>(t);
  }
  double sum = 0.0;
  for (long tau = t_sharp; tau <= T; ++tau) {
    const auto i = static_cast<std::size_t>(T - tau);
    sum += at(delta, tau) - bar_delta[i] + bar_xi[i] - xi_delta(tau);
  }
  const auto last = delta.size();  // t = t_sharp - 1
  return sum - static_cast<double>(t_sharp - 1) * (bar_delta[last] - bar_xi[last]);
}

SampleSummary mc_policy_value(const DemandModel& model, const Policy& policy, long horizon,
                              double initial_inventory, long replications, std::uint64_t base_seed,
                              double level) {
  if (replications < 1) throw DomainError("replications must be >= 1");
  std::vector<double> totals(replications);
  parallel_for(totals.size(), [&](std::size_t i) {
    totals[i] = simulate(model, policy, horizon, initial_inventory, replication_seed(base_seed, i))
                    .total_revenue;
  });
  return summarize(totals, level);
}

SampleSummary mc_value_difference(const DemandModel& model, const Policy& a, const Policy& b,
                                  long horizon, double initial_inventory, long replications,
                                  std::uint64_t base_seed, bool common_random_numbers,
                                  double level) {
  if (replications < 1) throw DomainError("replications must be >= 1");
  std::vector<double> diffs(replications);
  parallel_for(diffs.size(), [&](std::size_t i) {
    const auto seed_a = replication_seed(base_seed, i);
    const auto seed_b = common_random_numbers ? seed_a : replication_seed(~base_seed, i);
    diffs[i] = simulate(model, a, horizon, initial_inventory, seed_a).total_revenue -
               simulate(model, b, horizon, initial_inventory, seed_b).total_revenue;
  });
  return summarize(diffs, level);
}

ConstantBound constant_bound(const DemandModel& model, double x_T) {
  const auto& iv = model.interval();
  const double xu = model.unconstrained_optimum();
  if (!(x_T > iv.d_lo && x_T < xu)) {
    throw DomainError(fmt::format("constant_bound: x_T = {} outside the open interval ({}, {})", x_T,
                                  iv.d_lo, xu));
  }
  const auto c = assumption_constants(model);
  const double curv = std::abs(model.revenue_second_derivative());
  ConstantBound b;
  b.gamma = stopping_threshold(model, x_T);
  b.smoothness_term = c.M * c.M * std::pow(c.B_xi, 4) / (2.0 * c.m);
  b.coupling_term = 2.0 * std::pow(curv * c.L * c.B_xi, 2) / c.m;
  b.curvature_term = 3.0 * curv * c.B_xi * c.B_xi;
  b.stopping_term = model.revenue_rate(xu) * (1.0 + 4.0 * std::pow(c.B_xi / b.gamma, 4));
  return b;
}

double ho_revenue(const DemandModel& model, double x_T, long horizon, double xi_bar) {
  const auto& iv = model.interval();
  return static_cast<double>(horizon) * model.revenue_rate(std::clamp(x_T + xi_bar, iv.d_lo, iv.d_hi));
}

double sample_xi_bar(const DemandModel& model, long horizon, std::uint64_t seed) {
  if (model.is_bernoulli()) throw UnsupportedError("xi_bar sampling needs price-independent noise");
  const CounterRng rng(seed);
  std::vector<double> xi(horizon);
  const double p = model.interval().p_lo;  // any price: the noise does not depend on it
  for (long tau = horizon; tau >= 1; --tau) {
    xi[horizon - tau] = model.noise_from_uniform(p, rng.uniform_at(static_cast<std::uint64_t>(tau)));
  }
  return pairwise_sum(xi) / static_cast<double>(horizon);
}

const PolicyValue& RegretReport::row(const std::string& policy) const {
  for (const auto& r : rows)
    if (r.policy == policy) return r;
  throw std::out_of_range("regret report has no row for policy '" + policy + "'");
}

double fluid_value(const DemandModel& model, long horizon, double initial_inventory) {
  const double T = static_cast<double>(horizon);
  const double x = initial_inventory / T;
  const auto& iv = model.interval();
  if (x < iv.d_lo) {
    // Time-sharing between the price ceiling and shut-off.
    return T * x * model.inverse_demand(iv.d_lo);
  }
  return T * solve_fluid_single(model, x).objective;
}

namespace {

void check_policy_names(std::span<const std::string> policies) {
  for (const auto& p : policies) {
    if (p != "fluid" && p != "static" && p != "resolving" && p != "dp" && p != "ho") {
      throw ConfigError("unknown policy '" + p + "'");
    }
  }
}

}  // namespace

std::vector<RegretReport> estimate_regret(const DemandModel& model, std::span<const long> horizons,
                                          const std::function<long(long)>& y0_rule,
                                          std::span<const std::string> policies, long replications,
                                          std::uint64_t base_seed, double level) {
  check_policy_names(policies);
  if (replications < 1) throw DomainError("replications must be >= 1");
  std::vector<RegretReport> reports;
  for (long T : horizons) {
    if (T < 1) throw DomainError("horizon must be >= 1");
    RegretReport rep;
    rep.horizon = T;
    rep.initial_inventory = y0_rule(T);
    rep.base_seed = base_seed;
    rep.fluid_value = fluid_value(model, T, static_cast<double>(rep.initial_inventory));
    const long y0 = rep.initial_inventory;
    const double x_T = static_cast<double>(y0) / static_cast<double>(T);
    auto make_policy = [&](const std::string& name) -> PolicyPtr {
      // With y0 = 0 every policy is shut off, so any positive rate will do.
      if (name == "static") return static_policy(model, y0 > 0 ? x_T : model.interval().d_lo);
      return resolving_policy(model);
    };

    std::vector<std::pair<std::string, SampleSummary>> values;
    if (model.is_bernoulli()) {
      rep.exact = true;
      rep.replications = 0;
      std::vector<std::string> names;
      std::vector<PolicyPtr> evaluated;
      for (const auto& p : policies) {
        if (p == "ho") {
          throw UnsupportedError("ho benchmark is defined for additive i.i.d. noise only");
        }
        if (p == "static" || p == "resolving") {
          names.push_back(p);
          evaluated.push_back(make_policy(p));
        }
      }
      const auto ex = evaluate_exact(model, T, y0, evaluated);
      rep.dp_value = ex.dp_value;
      for (std::size_t k = 0; k < names.size(); ++k) {
        values.emplace_back(names[k], SampleSummary{ex.policy_values[k], 0.0, 0.0, 0});
      }
      for (const auto& p : policies) {
        if (p == "dp") values.emplace_back(p, SampleSummary{ex.dp_value, 0.0, 0.0, 0});
      }
    } else {
      rep.exact = false;
      rep.replications = replications;
      rep.dp_omitted_reason = "dp-unavailable:non-bernoulli-demand";
      for (const auto& p : policies) {
        if (p == "static" || p == "resolving") {
          const auto pol = make_policy(p);
          values.emplace_back(p, mc_policy_value(model, *pol, T, static_cast<double>(y0),
                                                 replications, base_seed, level));
        } else if (p == "ho") {
          std::vector<double> revenue(replications);
          parallel_for(revenue.size(), [&](std::size_t i) {
            const double xi_bar = sample_xi_bar(model, T, replication_seed(base_seed, i));
            revenue[i] = ho_revenue(model, x_T, T, xi_bar);
          });
          values.emplace_back(p, summarize(revenue, level));
        }
      }
    }
    for (const auto& p : policies) {
      PolicyValue row;
      row.policy = p;
      if (p == "fluid") {
        row.value = rep.fluid_value;
      } else {
        auto it = std::find_if(values.begin(), values.end(),
                               [&](const auto& v) { return v.first == p; });
        if (it == values.end()) continue;  // dp without a DP
        row.value = it->second.mean;
        row.ci_half_width = it->second.half_width;
      }
      if (rep.dp_value) row.regret_vs_dp = *rep.dp_value - row.value;
      row.regret_vs_fluid = rep.fluid_value - row.value;
      rep.rows.push_back(std::move(row));
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

MultiSimTrace simulate_multi(const MultiModel& model, const MultiPolicy& policy, long horizon,
                             const Eigen::VectorXd& initial_inventory, std::uint64_t seed) {
  if (horizon < 1) throw DomainError("simulate_multi: horizon must be >= 1");
  const auto n = model.size();
  const CounterRng rng(seed);
  MultiSimTrace tr;
  tr.horizon = horizon;
  tr.seed = seed;
  Eigen::VectorXd y = initial_inventory;
  for (long tau = horizon; tau >= 1; --tau) {
    const auto dec = policy.decide(y, tau);
    double revenue = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (dec.shut_off[k]) continue;
      const double u = rng.uniform_at(static_cast<std::uint64_t>(tau) * n + k);
      if (u < dec.demand_rate[k] && y[k] >= 1.0) {
        y[k] -= 1.0;
        revenue += dec.price[k];
      }
    }
    tr.revenue.push_back(revenue);
    tr.inventory_after.push_back(y);
  }
  tr.total_revenue = pairwise_sum(tr.revenue);
  return tr;
}

SampleSummary mc_multi_value(const MultiModel& model, const MultiPolicy& policy, long horizon,
                             const Eigen::VectorXd& initial_inventory, long replications,
                             std::uint64_t base_seed, double level) {
  if (replications < 1) throw DomainError("replications must be >= 1");
  std::vector<double> totals(replications);
  parallel_for(totals.size(), [&](std::size_t i) {
    totals[i] = simulate_multi(model, policy, horizon, initial_inventory,
                               replication_seed(base_seed, i))
                    .total_revenue;
  });
  return summarize(totals, level);
}

}  // namespace rmsim
