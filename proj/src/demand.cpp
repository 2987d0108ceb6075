#include "rmsim/demand.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "rmsim/errors.hpp"
#include "rmsim/rng.hpp"

namespace rmsim {

namespace {

constexpr double kEdgeSlack = 1e-12;

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error([&] {
        std::string msg = "model validation failed:";
        for (const auto& v : violations) msg += " [" + v + "]";
        return msg;
      }()),
      violations_(std::move(violations)) {}

std::string to_string(DemandKind kind) {
  switch (kind) {
    case DemandKind::linear_bernoulli:
      return "linear-bernoulli";
    case DemandKind::linear_additive:
      return "linear-additive";
  }
  return "unknown";
}

DemandKind demand_kind_from_string(const std::string& name) {
  if (name == "linear-bernoulli") return DemandKind::linear_bernoulli;
  if (name == "linear-additive") return DemandKind::linear_additive;
  throw ConfigError("unknown demand kind '" + name + "'");
}

DemandModel::DemandModel(DemandKind kind, double alpha, double beta, double p_lo, double p_hi,
                         double w)
    : kind_(kind), alpha_(alpha), beta_(beta), noise_half_width_(w) {
  std::vector<std::string> violations;
  if (!(std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(p_lo) &&
        std::isfinite(p_hi) && std::isfinite(w))) {
    violations.emplace_back("parameters must be finite");
  }
  if (!(beta > 0.0)) violations.emplace_back("demand must be strictly decreasing (beta > 0)");
  if (!(p_lo < p_hi)) violations.emplace_back("empty price interval (p_lo >= p_hi)");
  interval_ = PriceInterval{p_lo, p_hi, alpha - beta * p_hi, alpha - beta * p_lo};
  if (kind == DemandKind::linear_bernoulli) {
    if (!(interval_.d_lo > 0.0 && interval_.d_hi < 1.0)) {
      violations.emplace_back(
          fmt::format("Bernoulli purchase probability must lie in (0,1), got [{}, {}]",
                      interval_.d_lo, interval_.d_hi));
    }
  } else {
    if (!(w >= 0.0)) violations.emplace_back("noise half-width must be nonnegative");
    if (!(interval_.d_lo - w >= 0.0)) {
      violations.emplace_back("additive noise can drive demand negative (w > d_lo)");
    }
  }
  if (!(interval_.d_lo >= 0.0)) violations.emplace_back("negative demand rate on interval");
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

DemandModel DemandModel::linear_bernoulli(double alpha, double beta, double p_lo, double p_hi) {
  return DemandModel(DemandKind::linear_bernoulli, alpha, beta, p_lo, p_hi, 0.0);
}

DemandModel DemandModel::linear_additive(double alpha, double beta, double p_lo, double p_hi,
                                         double noise_half_width) {
  return DemandModel(DemandKind::linear_additive, alpha, beta, p_lo, p_hi, noise_half_width);
}

void DemandModel::require_price(double price) const {
  const double slack = kEdgeSlack * std::max(1.0, std::abs(interval_.p_hi));
  if (!(price >= interval_.p_lo - slack && price <= interval_.p_hi + slack)) {
    throw DomainError(
        fmt::format("price {} outside [{}, {}]", price, interval_.p_lo, interval_.p_hi));
  }
}

void DemandModel::require_rate(double rate) const {
  const double slack = kEdgeSlack * std::max(1.0, std::abs(interval_.d_hi));
  if (!(rate >= interval_.d_lo - slack && rate <= interval_.d_hi + slack)) {
    throw DomainError(
        fmt::format("demand rate {} outside [{}, {}]", rate, interval_.d_lo, interval_.d_hi));
  }
}

double DemandModel::demand_at(double price) const {
  require_price(price);
  return std::clamp(alpha_ - beta_ * price, interval_.d_lo, interval_.d_hi);
}

double DemandModel::inverse_demand(double rate) const {
  require_rate(rate);
  return std::clamp((alpha_ - rate) / beta_, interval_.p_lo, interval_.p_hi);
}

double DemandModel::revenue_rate(double rate) const {
  require_rate(rate);
  return rate * (alpha_ - rate) / beta_;
}

double DemandModel::revenue_derivative(double rate) const {
  require_rate(rate);
  return (alpha_ - 2.0 * rate) / beta_;
}

double DemandModel::unconstrained_optimum() const {
  return std::clamp(alpha_ / 2.0, interval_.d_lo, interval_.d_hi);
}

DemandModel::TwoPoint DemandModel::bernoulli_noise(double price) const {
  const double q = demand_at(price);
  return TwoPoint{-q, 1.0 - q, q};
}

double DemandModel::noise_from_uniform(double price, double u) const {
  if (kind_ == DemandKind::linear_bernoulli) {
    const double q = demand_at(price);
    return (u < q) ? 1.0 - q : -q;
  }
  require_price(price);
  return noise_half_width_ * (2.0 * u - 1.0);
}

double DemandModel::sample_noise(double price, CounterRng& rng) const {
  return noise_from_uniform(price, rng.uniform());
}

double DemandModel::noise_variance(double price) const {
  if (kind_ == DemandKind::linear_bernoulli) {
    const double q = demand_at(price);
    return q * (1.0 - q);
  }
  require_price(price);
  return noise_half_width_ * noise_half_width_ / 3.0;
}

double wasserstein2_sq(std::vector<double> atoms_a, std::vector<double> probs_a,
                       std::vector<double> atoms_b, std::vector<double> probs_b) {
  auto sort_by_atom = [](std::vector<double>& atoms, std::vector<double>& probs) {
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return atoms[i] < atoms[j]; });
    std::vector<double> a, p;
    for (auto i : order) {
      if (probs[i] > 0.0) {
        a.push_back(atoms[i]);
        p.push_back(probs[i]);
      }
    }
    atoms = std::move(a);
    probs = std::move(p);
  };
  if (atoms_a.size() != probs_a.size() || atoms_b.size() != probs_b.size()) {
    throw std::invalid_argument("wasserstein2_sq: atom/probability size mismatch");
  }
  sort_by_atom(atoms_a, probs_a);
  sort_by_atom(atoms_b, probs_b);
  // Walk both quantile functions over the merged CDF breakpoints.
  double total = 0.0;
  std::size_t i = 0, j = 0;
  double left_a = probs_a.empty() ? 0.0 : probs_a[0];
  double left_b = probs_b.empty() ? 0.0 : probs_b[0];
  while (i < atoms_a.size() && j < atoms_b.size()) {
    const double mass = std::min(left_a, left_b);
    const double diff = atoms_a[i] - atoms_b[j];
    total += mass * diff * diff;
    left_a -= mass;
    left_b -= mass;
    if (left_a <= 1e-15 && ++i < atoms_a.size()) left_a += probs_a[i];
    if (left_b <= 1e-15 && ++j < atoms_b.size()) left_b += probs_b[j];
  }
  return total;
}

AssumptionConstants assumption_constants(const DemandModel& model) {
  const auto& iv = model.interval();
  AssumptionConstants c;
  c.m = 2.0 / model.beta();
  c.M = 0.0;
  c.C = std::max(std::abs(model.revenue_derivative(iv.d_lo)),
                 std::abs(model.revenue_derivative(iv.d_hi)));

  const auto steps = static_cast<long>(std::floor((iv.p_hi - iv.p_lo) / kAssumptionGridStep + 1e-9));
  std::vector<double> grid;
  grid.reserve(steps + 2);
  for (long k = 0; k <= steps; ++k) grid.push_back(iv.p_lo + k * kAssumptionGridStep);
  if (grid.back() < iv.p_hi) grid.push_back(iv.p_hi);

  c.sigma_sq = std::numeric_limits<double>::infinity();
  for (double p : grid) c.sigma_sq = std::min(c.sigma_sq, model.noise_variance(p));

  if (model.is_bernoulli()) {
    c.B_xi = 1.0;
    double worst = 0.0;
    for (std::size_t a = 0; a < grid.size(); ++a) {
      const auto na = model.bernoulli_noise(grid[a]);
      for (std::size_t b = a + 1; b < grid.size(); ++b) {
        const auto nb = model.bernoulli_noise(grid[b]);
        const double w2 = std::sqrt(wasserstein2_sq({na.low, na.high}, {1.0 - na.p_high, na.p_high},
                                                    {nb.low, nb.high}, {1.0 - nb.p_high, nb.p_high}));
        worst = std::max(worst, w2 / (grid[b] - grid[a]));
      }
    }
    c.L = worst;
  } else {
    c.B_xi = model.noise_half_width();
    c.L = 0.0;
  }
  return c;
}

}  // namespace rmsim
