// Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when
// any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "rmsim/experiments.hpp"
#include "rmsim/fluid.hpp"
#include "rmsim/multi.hpp"
#include "rmsim/rng.hpp"
#include "rmsim/sim.hpp"
#include "rmsim/stats.hpp"

using namespace rmsim;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Target regret table, log2 T = 6..15, two decimals.
constexpr std::array<double, 10> kFluid{-0.90, -1.13, -1.37, -1.63, -1.91,
                                        -2.19, -2.48, -2.78, -3.08, -3.37};
constexpr std::array<double, 10> kStatic{0.38, 0.70, 1.22, 2.03, 3.27,
                                         5.13, 7.84, 11.81, 17.55, 25.84};
constexpr std::array<double, 10> kResolving{0.11, 0.15, 0.18, 0.21, 0.23,
                                            0.23, 0.24, 0.24, 0.24, 0.25};

std::vector<RegretReport> g_table;  // log2 T = 6..15, computed once

double regret(std::size_t k, const char* policy) {
  return g_table[k].row(policy).regret_vs_dp.value();
}

Outcome table_rows(std::size_t from, std::size_t to, double tol_static) {
  Outcome o;
  double worst_fluid = 0, worst_static = 0, worst_res = 0;
  for (std::size_t k = from; k <= to; ++k) {
    const double ef = std::abs(regret(k, "fluid") - kFluid[k]);
    const double es = std::abs(regret(k, "static") - kStatic[k]);
    const double er = std::abs(regret(k, "resolving") - kResolving[k]);
    worst_fluid = std::max(worst_fluid, ef);
    worst_static = std::max(worst_static, es);
    worst_res = std::max(worst_res, er);
    o.detail += fmt::format("\n    2^{:<2} fluid {:8.4f} ({:6.2f})  static {:8.4f} ({:6.2f})  "
                            "resolving {:7.4f} ({:5.2f})",
                            k + 6, regret(k, "fluid"), kFluid[k], regret(k, "static"), kStatic[k],
                            regret(k, "resolving"), kResolving[k]);
    if (er > 0.01 + 1e-12 || es > tol_static + 1e-12) o.pass = false;
  }
  o.detail = fmt::format("max |err| static {:.4f} (tol {}), resolving {:.4f} (tol 0.01), fluid {:.4f}",
                         worst_static, tol_static, worst_res, worst_fluid) +
             o.detail;
  return o;
}

Outcome criterion1() {
  // The fluid row is held to the same tolerance.
  auto o = table_rows(0, 4, 0.01);
  for (std::size_t k = 0; k <= 4; ++k)
    if (std::abs(regret(k, "fluid") - kFluid[k]) > 0.01 + 1e-12) o.pass = false;
  return o;
}

Outcome criterion2() { return table_rows(5, 9, 0.02); }

Outcome criterion3() {
  std::vector<double> x, y;
  for (std::size_t k = 0; k < g_table.size(); ++k) {
    x.push_back(double(k + 6));
    y.push_back(-regret(k, "fluid"));  // fluid value minus DP value
  }
  const auto fit = least_squares(x, y);
  return {fit.slope >= 0.22 && fit.slope <= 0.33 && fit.r_squared >= 0.99,
          fmt::format("slope {:.4f} per log2 T (want [0.22, 0.33]), R^2 {:.5f} (want >= 0.99)",
                      fit.slope, fit.r_squared)};
}

Outcome criterion4() {
  const double base = regret(4, "resolving");
  double worst = base;
  for (std::size_t k = 4; k < g_table.size(); ++k) worst = std::max(worst, regret(k, "resolving"));
  return {worst - base <= 0.03,
          fmt::format("regret at 2^10 {:.4f}, max over 2^10..2^15 {:.4f}, rise {:.4f} (want <= 0.03)",
                      base, worst, worst - base)};
}

Outcome criterion5() {
  SweepConfig cfg = SweepConfig::defaults(SweepKind::gap, 4, 16);
  cfg.values = {0.375};
  const auto curve = run_sweep(cfg).front();
  Outcome o{curve.strictly_increasing(), "regrets:"};
  for (const auto& p : curve.points) o.detail += fmt::format(" {:.4f}", p.regret);
  return o;
}

Outcome criterion6() {
  const auto model = reference_model();
  const double x_T = 0.5;
  // Constant-bound form with the stopping band set by the slack x_T - x^u.
  const auto c = assumption_constants(model);
  const double gamma = x_T - model.unconstrained_optimum();
  const double cap = 3.0 * std::abs(model.revenue_second_derivative()) * c.B_xi * c.B_xi +
                     model.revenue_rate(model.unconstrained_optimum()) *
                         (1.0 + 4.0 * std::pow(c.B_xi / gamma, 4));
  Outcome o{true, fmt::format("cap {:.2f};", cap)};
  std::vector<std::array<double, 2>> rows;
  for (int k = 8; k <= 15; ++k) {
    const long T = 1L << k;
    const PolicyPtr pols[] = {static_policy(model, x_T), resolving_policy(model)};
    const auto ex = evaluate_exact(model, T, T / 2, pols);
    rows.push_back({ex.dp_value - ex.policy_values[0], ex.dp_value - ex.policy_values[1]});
    o.detail += fmt::format(" 2^{}: ({:.2e}, {:.2e})", k, rows.back()[0], rows.back()[1]);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int p = 0; p < 2; ++p) {
      if (!(rows[i][p] <= cap)) o.pass = false;
      if (i > 0 && rows[i][p] > rows[i - 1][p] + 0.02) o.pass = false;
    }
  }
  return o;
}

Outcome criterion7() {
  const auto model = reference_model();
  const long T = 1024, y0 = 320, reps = 10000;
  const double x_T = 0.3125;
  const auto pol = resolving_policy(model);
  std::vector<double> t_sharp(reps);
  parallel_for(reps, [&](std::size_t i) {
    const auto tr = simulate(model, *pol, T, double(y0), replication_seed(2024, i));
    t_sharp[i] = double(diagnostics(tr, model, x_T).t_sharp);
  });
  const auto s = summarize(t_sharp);
  const double gamma = stopping_threshold(model, x_T);
  const double bound = 2.0 + 4.0 / std::pow(gamma, 4);  // B_xi = 1
  const double se = s.sd / std::sqrt(double(reps));
  return {s.mean - 3.0 * se <= bound,
          fmt::format("E[T#] = {:.3f} (se {:.3f}), gamma = {}, bound {:.0f}", s.mean, se, gamma,
                      bound)};
}

Outcome criterion8() {
  std::vector<std::string> failed;
  std::string detail;
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // (a) harmonic identity
  double worst_identity = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const long ts = 2 + long(unit(gen) * 100), n = 1 + long(unit(gen) * 1000);
    std::vector<double> d(n), a(n), b(n);
    for (long i = 0; i < n; ++i) d[i] = unit(gen) - 0.5, a[i] = unit(gen) - 0.5, b[i] = unit(gen) - 0.5;
    const double T = double(ts + n - 1);
    worst_identity = std::max(worst_identity, std::abs(harmonic_identity_check(ts, d, a, b)) / T);
  }
  if (!(worst_identity < 1e-10)) failed.push_back("harmonic identity");
  detail += fmt::format("identity residual/T {:.1e}", worst_identity);

  // (b) KKT residuals
  auto random_model = [&](int n) {
    MultiDemandModel<double> m;
    m.H = oracle::random_neg_def(gen, n);
    m.g.resize(n);
    m.box_hi.resize(n);
    for (int k = 0; k < n; ++k) m.g[k] = 2 * unit(gen) - 0.5, m.box_hi[k] = 0.1 + 0.9 * unit(gen);
    return m;
  };
  double worst_kkt = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 1 + rep % 5;
    const auto m = random_model(n);
    Eigen::VectorXd x(n);
    for (int k = 0; k < n; ++k) x[k] = 1.2 * unit(gen);
    const auto s = solve_fluid_multi(m, x);
    const Eigen::VectorXd hi = x.cwiseMin(m.box_hi);
    double r = s.stationarity_residual;
    r = std::max(r, (s.lambda.array() * (hi - s.x_c).array()).abs().maxCoeff());
    r = std::max(r, (s.lower_dual.array() * s.x_c.array()).abs().maxCoeff());
    r = std::max(r, (s.x_c - hi).maxCoeff());
    r = std::max(r, -s.x_c.minCoeff());
    r = std::max(r, -std::min(s.lambda.minCoeff(), s.lower_dual.minCoeff()));
    worst_kkt = std::max(worst_kkt, r);
  }
  if (!(worst_kkt <= 1e-8)) failed.push_back("KKT");
  detail += fmt::format("; KKT {:.1e}", worst_kkt);

  // (c) finite differences of R(z)
  double worst_grad = 0, worst_hess = 0;
  int fd_cases = 0;
  for (int rep = 0; rep < 200 && fd_cases < 100; ++rep) {
    const int n = 2 + rep % 4;
    const auto m = random_model(n);
    std::vector<int> idx;
    for (int k = 0; k < n; ++k)
      if (unit(gen) < 0.5) idx.push_back(k);
    if (idx.empty()) idx.push_back(0);
    Eigen::VectorXd z(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) z[j] = (0.2 + 0.6 * unit(gen)) * m.box_hi[idx[j]];
    const auto p = partial_optimum(m, idx, z);
    const double h = 1e-5;
    Eigen::VectorXd fg(z.size());
    Eigen::MatrixXd fh(z.size(), z.size());
    bool stable = true;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      Eigen::VectorXd zp = z, zm = z;
      zp[j] += h;
      zm[j] -= h;
      const auto pp = partial_optimum(m, idx, zp), pm = partial_optimum(m, idx, zm);
      if ((pp.sensitivity - pm.sensitivity).cwiseAbs().maxCoeff() > 1e-12) stable = false;
      fg[j] = (pp.value - pm.value) / (2 * h);
      fh.col(j) = (pp.grad - pm.grad) / (2 * h);
    }
    if (!stable) continue;  // a bound of the inner problem switches within the stencil
    ++fd_cases;
    worst_grad = std::max(worst_grad, (fg - p.grad).cwiseAbs().maxCoeff() /
                                          std::max(1.0, p.grad.cwiseAbs().maxCoeff()));
    worst_hess = std::max(worst_hess, (fh - p.hess).cwiseAbs().maxCoeff() /
                                          std::max(1.0, p.hess.cwiseAbs().maxCoeff()));
  }
  if (!(worst_grad <= 1e-5 && worst_hess <= 1e-4 && fd_cases >= 50)) failed.push_back("finite differences");
  detail += fmt::format("; FD grad {:.1e} hess {:.1e} ({} cases)", worst_grad, worst_hess, fd_cases);

  // (d) n = 2 solver vs grid oracle
  double worst_grid = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto m = random_model(2);
    const Eigen::Vector2d x(unit(gen), unit(gen));
    const auto s = solve_fluid_multi(m, Eigen::VectorXd(x));
    const auto g = oracle::grid_max_2d(m.H, m.g, x.cwiseMin(m.box_hi), 1e-3);
    worst_grid = std::max(worst_grid, (s.x_c - g).cwiseAbs().maxCoeff());
  }
  if (!(worst_grid <= 2e-3)) failed.push_back("grid oracle");
  detail += fmt::format("; grid {:.1e}", worst_grid);

  // (e) DP <= fluid at every state
  const auto model = reference_model();
  const auto table = solve_dp(model, 512, 512);
  double worst_excess = -1e300;
  for (long t = 1; t <= 512; ++t)
    for (long y = 0; y <= 512; ++y)
      worst_excess = std::max(worst_excess, table.value(t, y) - fluid_value(model, t, double(y)));
  if (!(worst_excess <= 1e-9)) failed.push_back("DP <= fluid");
  detail += fmt::format("; max V - fluid {:.2e}", worst_excess);

  // (f) simulated DP policy vs its value
  const long T = 64, y0 = 20;
  const auto tab = std::make_shared<const ValueTable>(solve_dp(model, T, y0));
  const auto mc = mc_policy_value(model, *dp_policy(model, tab), T, y0, 100000, 88, 0.99);
  const double v = tab->value(T, y0);
  if (!(std::abs(mc.mean - v) <= mc.half_width)) failed.push_back("simulate(DP)");
  detail += fmt::format("; MC {:.4f} +- {:.4f} vs V {:.4f}", mc.mean, mc.half_width, v);

  if (!failed.empty()) {
    detail += "; failed:";
    for (const auto& f : failed) detail += " " + f;
  }
  return {failed.empty(), detail};
}

Outcome criterion9() {
  const auto model = DemandModel::linear_additive(0.75, 0.5, 0.0, 1.0, 0.1);
  std::vector<long> Ts;
  for (int k = 6; k <= 12; ++k) Ts.push_back(1L << k);
  const auto pts = run_ho_compare(model, Ts, 0.3125, 20000, 909);
  Outcome o{true, ""};
  std::vector<double> x, gaps;
  bool sign_ok = true;
  for (const auto& p : pts) {
    if (!(p.gap <= p.bound + 3 * p.ci_half_width)) o.pass = false;
    if (p.gap < -3 * p.ci_half_width) sign_ok = false;
    x.push_back(double(p.horizon));
    gaps.push_back(p.gap);
    o.detail += fmt::format(" {:.5f}+-{:.5f}", p.gap, p.ci_half_width);
  }
  const auto rc = spearman(x, gaps);
  if (rc.p_positive < 0.05) o.pass = false;
  o.detail = fmt::format("bound {:.5f}, Spearman rho {:.3f} (one-sided p {:.3f}), gap >= 0 {}; gaps:",
                         pts.front().bound, rc.rho, rc.p_positive, sign_ok ? "yes" : "no") +
             o.detail;
  return o;
}

Outcome criterion10() {
  MultiModel m;
  m.g = Eigen::Vector2d(1, 1);
  m.H.resize(2, 2);
  m.H << -2, -0.5, -0.5, -2;
  m.box_hi = Eigen::Vector2d(0.5, 0.5);
  const Eigen::Vector2d x_T(0.25, 0.5);
  const auto fluid = solve_fluid_multi(m, Eigen::VectorXd(x_T));
  Outcome o{true, fmt::format("I = {{{}}}, lambda {:.4f}, degenerate {};", fluid.active_set.size() == 1 ? fluid.active_set[0] : -1,
                              fluid.lambda[0], fluid.degenerate)};
  const auto res = resolving_multi_policy(m);
  std::vector<SampleSummary> regrets;
  for (long T : {16L, 32L, 64L}) {
    const std::array<long, 2> start{T / 4, T / 2};
    const auto table = std::make_shared<const MultiValueTable>(solve_dp_multi(m, T, start));
    const auto dp = dp_multi_policy(m, table);
    const long reps = 100000;
    std::vector<double> diff(reps);
    const Eigen::VectorXd inv = Eigen::Vector2d(double(start[0]), double(start[1]));
    parallel_for(reps, [&](std::size_t i) {
      const auto seed = replication_seed(1010, i);
      diff[i] = simulate_multi(m, *dp, T, inv, seed).total_revenue -
                simulate_multi(m, *res, T, inv, seed).total_revenue;
    });
    const auto s = summarize(diff);
    regrets.push_back(s);
    const double exact = table->value(T, start[0], start[1]) - evaluate_policy_exact_multi(m, *res, T, start);
    o.detail += fmt::format(" T={}: {:.4f}+-{:.4f} (exact {:.4f})", T, s.mean, s.half_width, exact);
    if (!(s.mean - s.half_width > 0)) o.pass = false;
  }
  for (std::size_t k = 1; k < regrets.size(); ++k) {
    const double ratio_upper_ci = (regrets[k].mean - regrets[k].half_width) /
                                  (regrets[k - 1].mean + regrets[k - 1].half_width);
    o.detail += fmt::format(" ratio {:.3f}", regrets[k].mean / regrets[k - 1].mean);
    if (ratio_upper_ci > 1.5) o.pass = false;
  }
  return o;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  std::vector<long> Ts;
  for (int k = 6; k <= 15; ++k) Ts.push_back(1L << k);
  g_table = run_table2(Ts, false);
  std::printf("%s", format_table2(g_table).c_str());

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Table 2, T = 2^6..2^10", criterion1},
      {"Extended Table 2, T = 2^11..2^15", criterion2},
      {"Logarithmic fluid gap", criterion3},
      {"Constant regret plateau", criterion4},
      {"Boundary case x_T = x^u increasing", criterion5},
      {"Sufficient inventory x_T = 0.5", criterion6},
      {"Stopping time E[T#] bound", criterion7},
      {"Property suites", criterion8},
      {"Hindsight-optimum gap", criterion9},
      {"Multi-product regret", criterion10},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(clock::now() - start).count();
    std::printf("%s criterion %zu: %s [%.1fs]\n  %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, secs, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed (%.1fs total)\n", int(criteria.size()) - failures,
              criteria.size(), std::chrono::duration<double>(clock::now() - t0).count());
  return failures == 0 ? 0 : 1;
}
