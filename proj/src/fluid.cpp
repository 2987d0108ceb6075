#include "rmsim/fluid.hpp"

#include <algorithm>
#include <cmath>

namespace rmsim {

FluidSolution<double> solve_fluid_single(const DemandModel& model, double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw DomainError("solve_fluid_single: inventory right-hand side must be finite and >= 0");
  }
  const auto& iv = model.interval();
  const double xu = model.unconstrained_optimum();
  FluidSolution<double> sol;
  sol.clamped_low = x < iv.d_lo;
  sol.boundary = std::abs(x - xu) <= kActiveTol;
  const double xc = std::min(std::max(x, iv.d_lo), xu);
  sol.x_c = VectorX<double>::Constant(1, xc);
  sol.objective = model.revenue_rate(xc);
  sol.lambda = VectorX<double>::Zero(1);
  sol.box_dual = VectorX<double>::Zero(1);
  sol.lower_dual = VectorX<double>::Zero(1);

  const double grad = model.revenue_derivative(xc);
  if (x <= xu) {
    // When clamped, x_c = d_lo exceeds x and the price ceiling holds the rate;
    // the multiplier is still r'(x_c) >= 0.
    sol.active_set.push_back(0);
    sol.lambda[0] = std::max(grad, 0.0);
    sol.degenerate = sol.lambda[0] <= kActiveTol;
  }
  sol.stationarity_residual = std::abs(grad - sol.lambda[0] + sol.lower_dual[0]);
  return sol;
}

}  // namespace rmsim
