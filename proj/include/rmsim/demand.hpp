#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace rmsim {

class CounterRng;

// Price interval [p_lo, p_hi] and the demand-rate interval it maps onto.
// Demand is decreasing in price, so d_hi = f(p_lo) and d_lo = f(p_hi).
struct PriceInterval {
  double p_lo = 0.0;
  double p_hi = 1.0;
  double d_lo = 0.0;
  double d_hi = 1.0;

  bool operator==(const PriceInterval&) const = default;
};

enum class DemandKind { linear_bernoulli, linear_additive };

std::string to_string(DemandKind kind);
DemandKind demand_kind_from_string(const std::string& name);

// Constants of the regularity assumptions on r(d) and the noise family.
struct AssumptionConstants {
  double m = 0.0;         // r''(d) <= -m
  double M = 0.0;         // |r'''(d)| <= M
  double C = 0.0;         // Lipschitz constant of r on [d_lo, d_hi]
  double B_xi = 0.0;      // |xi| <= B_xi almost surely
  double L = 0.0;         // W2(Q(p), Q(p')) <= L |p - p'| on the price grid
  double sigma_sq = 0.0;  // inf_p Var(xi | p)
};

// Single-product linear demand f(p) = alpha - beta p on a bounded price
// interval. Demand noise is either Bernoulli unit sales (the rate is a
// purchase probability) or additive uniform noise on [-w, w].
//
// Immutable after construction.
class DemandModel {
 public:
  static DemandModel linear_bernoulli(double alpha, double beta, double p_lo = 0.0,
                                      double p_hi = 1.0);
  static DemandModel linear_additive(double alpha, double beta, double p_lo, double p_hi,
                                     double noise_half_width);

  DemandKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const PriceInterval& interval() const { return interval_; }
  double noise_half_width() const { return noise_half_width_; }
  bool is_bernoulli() const { return kind_ == DemandKind::linear_bernoulli; }

  double demand_at(double price) const;
  double inverse_demand(double rate) const;
  double revenue_rate(double rate) const;
  double revenue_derivative(double rate) const;
  double revenue_second_derivative() const { return -2.0 / beta_; }

  // argmax of r over [d_lo, d_hi].
  double unconstrained_optimum() const;

  // Maps one uniform draw u in [0,1) to the demand noise at `price`. The
  // Bernoulli kind sells a unit iff u < f(p).
  double noise_from_uniform(double price, double u) const;
  double sample_noise(double price, CounterRng& rng) const;

  // Support and probabilities of the (discrete) Bernoulli noise at `price`.
  struct TwoPoint {
    double low, high, p_high;
  };
  TwoPoint bernoulli_noise(double price) const;

  double noise_variance(double price) const;

  bool operator==(const DemandModel&) const = default;

 private:
  DemandModel(DemandKind kind, double alpha, double beta, double p_lo, double p_hi, double w);

  void require_price(double price) const;
  void require_rate(double rate) const;

  DemandKind kind_;
  double alpha_;
  double beta_;
  PriceInterval interval_;
  double noise_half_width_;
};

// Squared 2-Wasserstein distance between two finitely supported
// distributions on the real line, via the quantile coupling.
double wasserstein2_sq(std::vector<double> atoms_a, std::vector<double> probs_a,
                       std::vector<double> atoms_b, std::vector<double> probs_b);

// Price-grid spacing used for L and sigma_sq.
inline constexpr double kAssumptionGridStep = 1e-3;

AssumptionConstants assumption_constants(const DemandModel& model);

inline constexpr double kShutOffPrice = std::numeric_limits<double>::infinity();

}  // namespace rmsim
