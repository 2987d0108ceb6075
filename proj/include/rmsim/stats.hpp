#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace rmsim {

// Pairwise (cascade) summation in a fixed order; the result depends only on
// the input sequence, not on how it was produced.
double pairwise_sum(std::span<const double> values);

struct SampleSummary {
  double mean = 0.0;
  double sd = 0.0;
  double half_width = 0.0;  // normal-approximation CI half-width
  long n = 0;
};

// Two-sided standard normal quantile for a confidence level, e.g. 0.95 -> 1.96.
double normal_critical_value(double level);

SampleSummary summarize(std::span<const double> values, double level = 0.95);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

struct RankCorrelation {
  double rho = 0.0;
  // One-sided p-value of H1: rho > 0 (t approximation).
  double p_positive = 1.0;
};

RankCorrelation spearman(std::span<const double> x, std::span<const double> y);

// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware
// concurrency). Work items must write to disjoint outputs.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace rmsim
