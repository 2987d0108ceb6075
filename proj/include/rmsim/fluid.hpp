#pragma once

#include <vector>

#include "rmsim/demand.hpp"
#include "rmsim/quadratic.hpp"

namespace rmsim {

// Tie tolerance for membership in the inventory-constrained set I, and the
// multiplier level below which an active constraint counts as degenerate.
inline constexpr double kActiveTol = 1e-10;

template <typename Scalar>
struct FluidSolution {
  VectorX<Scalar> x_c;     // constrained-optimal demand rates
  VectorX<Scalar> lambda;  // multipliers of x_c <= x (inventory)
  VectorX<Scalar> box_dual;    // multipliers of x_c <= box_hi when that bound binds first
  VectorX<Scalar> lower_dual;  // multipliers of x_c >= lower demand bound
  std::vector<int> active_set;  // I = {k : x_c(k) = x(k)}, 0-based
  Scalar objective = Scalar(0);

  bool clamped_low = false;  // single product: x < d_lo was raised to d_lo
  bool boundary = false;     // single product: x == x^u
  bool degenerate = false;   // some k in I has lambda(k) <= kActiveTol

  // ||grad r(x_c) - lambda - box_dual + lower_dual||_inf
  Scalar stationarity_residual = Scalar(0);
};

// Closed-form single-product fluid solution x_c = min(max(x, d_lo), x^u).
FluidSolution<double> solve_fluid_single(const DemandModel& model, double x);

template <typename Scalar>
struct ActivePartition {
  std::vector<int> constrained;    // I
  std::vector<int> unconstrained;  // U
  bool degenerate = false;
};

template <typename Scalar>
FluidSolution<Scalar> solve_fluid_multi(const MultiDemandModel<Scalar>& model,
                                        const VectorX<Scalar>& x) {
  const auto n = model.size();
  if (x.size() != n) throw std::invalid_argument("solve_fluid_multi: inventory size mismatch");
  if (!x.allFinite() || !(x.array() >= Scalar(0)).all()) {
    throw DomainError("solve_fluid_multi: inventory right-hand side must be finite and >= 0");
  }
  const VectorX<Scalar> lo = VectorX<Scalar>::Zero(n);
  const VectorX<Scalar> hi = x.cwiseMin(model.box_hi);
  const auto qp = maximize_box_qp<Scalar>(model.H, model.g, lo, hi);

  FluidSolution<Scalar> sol;
  sol.x_c = qp.x;
  sol.objective = qp.objective;
  sol.lambda = VectorX<Scalar>::Zero(n);
  sol.box_dual = VectorX<Scalar>::Zero(n);
  sol.lower_dual = VectorX<Scalar>::Zero(n);
  const auto& grad = qp.gradient;
  for (Eigen::Index k = 0; k < n; ++k) {
    const bool at_hi = qp.x[k] >= hi[k] - Scalar(kActiveTol);
    const bool at_lo = qp.x[k] <= lo[k] + Scalar(kActiveTol);
    const bool inventory_binds = x[k] <= model.box_hi[k];
    if (at_hi && grad[k] > 0) {
      (inventory_binds ? sol.lambda : sol.box_dual)[k] = grad[k];
    } else if (at_lo && grad[k] < 0) {
      sol.lower_dual[k] = -grad[k];
    }
    if (std::abs(qp.x[k] - x[k]) <= Scalar(kActiveTol)) {
      sol.active_set.push_back(static_cast<int>(k));
      if (sol.lambda[k] <= Scalar(kActiveTol)) sol.degenerate = true;
    }
  }
  sol.stationarity_residual =
      (grad - sol.lambda - sol.box_dual + sol.lower_dual).cwiseAbs().maxCoeff();
  return sol;
}

template <typename Scalar>
ActivePartition<Scalar> active_partition(const MultiDemandModel<Scalar>& model,
                                         const VectorX<Scalar>& x) {
  const auto sol = solve_fluid_multi(model, x);
  ActivePartition<Scalar> part;
  part.constrained = sol.active_set;
  part.degenerate = sol.degenerate;
  std::vector<bool> in_i(model.size(), false);
  for (int k : part.constrained) in_i[k] = true;
  for (int k = 0; k < model.size(); ++k)
    if (!in_i[k]) part.unconstrained.push_back(k);
  return part;
}

// R(z) = max { r(x) : x(I) = z, x in D } with its envelope gradient and
// Schur-complement Hessian.
template <typename Scalar>
struct PartialOptimum {
  VectorX<Scalar> z;
  Scalar value = Scalar(0);
  VectorX<Scalar> grad;          // grad_I r(x*(z))
  MatrixX<Scalar> hess;          // H_II - H_IF H_FF^{-1} H_FI over free F in U
  VectorX<Scalar> full_solution; // x*(z)
  MatrixX<Scalar> sensitivity;   // d x*(z) / dz, n x |I|
};

template <typename Scalar>
PartialOptimum<Scalar> partial_optimum(const MultiDemandModel<Scalar>& model,
                                       const std::vector<int>& constrained,
                                       const VectorX<Scalar>& z) {
  const auto n = model.size();
  if (static_cast<Eigen::Index>(constrained.size()) != z.size()) {
    throw std::invalid_argument("partial_optimum: |I| does not match z");
  }
  std::vector<bool> in_i(n, false);
  std::vector<Eigen::Index> idx_i, idx_u;
  for (int k : constrained) {
    if (k < 0 || k >= n || in_i[k]) throw std::invalid_argument("partial_optimum: bad index set");
    in_i[k] = true;
    idx_i.push_back(k);
  }
  for (Eigen::Index k = 0; k < n; ++k)
    if (!in_i[k]) idx_u.push_back(k);
  for (std::size_t j = 0; j < idx_i.size(); ++j) {
    const Scalar zj = z[static_cast<Eigen::Index>(j)];
    if (!(zj >= Scalar(0) && zj <= model.box_hi[idx_i[j]])) {
      throw DomainError(fmt::format("partial_optimum: z[{}] = {} outside the domain projection",
                                    j, double(zj)));
    }
  }

  PartialOptimum<Scalar> out;
  out.z = z;
  VectorX<Scalar> x = VectorX<Scalar>::Zero(n);
  x(idx_i) = z;
  std::vector<Eigen::Index> free;
  if (!idx_u.empty()) {
    VectorX<Scalar> g_u = model.g(idx_u);
    if (!idx_i.empty()) g_u += model.H(idx_u, idx_i) * z;
    const MatrixX<Scalar> h_uu = model.H(idx_u, idx_u);
    const auto qp = maximize_box_qp<Scalar>(h_uu, g_u, VectorX<Scalar>::Zero(idx_u.size()),
                                            model.box_hi(idx_u));
    x(idx_u) = qp.x;
    for (std::size_t j = 0; j < idx_u.size(); ++j)
      if (qp.state[j] == BoundState::free) free.push_back(idx_u[j]);
  }
  out.full_solution = x;
  out.value = model.revenue(x);
  out.grad = model.gradient(x)(idx_i);
  out.hess = model.H(idx_i, idx_i);
  out.sensitivity = MatrixX<Scalar>::Zero(n, idx_i.size());
  for (std::size_t j = 0; j < idx_i.size(); ++j)
    out.sensitivity(idx_i[j], static_cast<Eigen::Index>(j)) = Scalar(1);
  if (!free.empty() && !idx_i.empty()) {
    const MatrixX<Scalar> h_fi = model.H(free, idx_i);
    Eigen::LLT<MatrixX<Scalar>> llt(-model.H(free, free));
    const MatrixX<Scalar> solved = llt.solve(h_fi);  // (-H_FF)^{-1} H_FI
    out.hess += model.H(idx_i, free) * solved;
    out.sensitivity(free, Eigen::all) = solved;
  }
  return out;
}

}  // namespace rmsim
