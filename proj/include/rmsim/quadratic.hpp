#pragma once

// Multi-product quadratic revenue model and the box-constrained concave QP
// solver shared by the fluid model and the multi-product DP.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "rmsim/errors.hpp"

namespace rmsim {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Revenue r(x) = g'x + x'Hx/2 over the box D = [0, box_hi]. The inverse
// demand consistent with r(x) = x' f^{-1}(x) is f^{-1}(x) = g + Hx/2.
// Each product sells at most one unit per period, with probability equal to
// its demand rate, independently across products.
template <typename Scalar>
struct MultiDemandModel {
  VectorX<Scalar> g;
  MatrixX<Scalar> H;
  VectorX<Scalar> box_hi;

  Eigen::Index size() const { return g.size(); }

  Scalar revenue(const VectorX<Scalar>& x) const { return g.dot(x) + Scalar(0.5) * x.dot(H * x); }
  VectorX<Scalar> gradient(const VectorX<Scalar>& x) const { return g + H * x; }
  VectorX<Scalar> prices(const VectorX<Scalar>& x) const { return g + Scalar(0.5) * (H * x); }
};

template <typename Scalar>
struct MultiValidationReport {
  bool valid = true;
  std::vector<std::string> violations;
  Scalar m_prime = Scalar(0);        // -lambda_max(H)
  Scalar spectral_norm = Scalar(0);  // ||H||_2
};

template <typename Scalar>
MultiValidationReport<Scalar> validate_multi(const MultiDemandModel<Scalar>& model,
                                             Scalar symmetry_tol = Scalar(1e-12)) {
  MultiValidationReport<Scalar> report;
  auto fail = [&](std::string what) {
    report.valid = false;
    report.violations.push_back(std::move(what));
  };
  const auto n = model.size();
  if (n < 1) fail("empty product set");
  if (model.H.rows() != n || model.H.cols() != n || model.box_hi.size() != n) {
    fail(fmt::format("shape: g has {} entries, H is {}x{}, box_hi has {}", n, model.H.rows(),
                     model.H.cols(), model.box_hi.size()));
    return report;
  }
  if (!model.g.allFinite() || !model.H.allFinite()) fail("non-finite revenue coefficients");
  if (!model.box_hi.allFinite()) fail("domain bounds must be finite");
  if (!(model.box_hi.array() > Scalar(0)).all()) {
    fail("domain box must contain 0 and have nonempty interior (box_hi > 0)");
  }
  if (!(model.box_hi.array() <= Scalar(1)).all()) {
    fail("unit sales require demand rates (purchase probabilities) <= 1");
  }
  if (!report.valid) return report;

  const Scalar asym = (model.H - model.H.transpose()).cwiseAbs().maxCoeff();
  if (asym > symmetry_tol * std::max(Scalar(1), model.H.cwiseAbs().maxCoeff())) {
    fail(fmt::format("Hessian is not symmetric (max asymmetry {})", double(asym)));
    return report;
  }
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(model.H, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  report.m_prime = -ev.maxCoeff();
  report.spectral_norm = ev.cwiseAbs().maxCoeff();
  const Scalar tiny = Scalar(1e-12) * std::max(Scalar(1), report.spectral_norm);
  if (!(report.m_prime > tiny)) {
    fail(fmt::format("revenue Hessian must be negative definite (largest eigenvalue {})",
                     double(ev.maxCoeff())));
  }
  return report;
}

enum class BoundState : unsigned char { free, lower, upper };

template <typename Scalar>
struct BoxQpResult {
  VectorX<Scalar> x;
  VectorX<Scalar> gradient;  // g + Hx at the solution
  std::vector<BoundState> state;
  Scalar objective = Scalar(0);
  int working_set_changes = 0;
};

namespace detail {

template <typename Scalar>
std::vector<Eigen::Index> indices_with(const std::vector<BoundState>& state, BoundState s) {
  std::vector<Eigen::Index> out;
  for (std::size_t k = 0; k < state.size(); ++k)
    if (state[k] == s) out.push_back(static_cast<Eigen::Index>(k));
  return out;
}

// Newton point on the free variables with the others held at x.
template <typename Scalar>
VectorX<Scalar> equality_qp(const MatrixX<Scalar>& H, const VectorX<Scalar>& g,
                            const VectorX<Scalar>& x, const std::vector<BoundState>& state) {
  std::vector<Eigen::Index> free, held;
  for (std::size_t k = 0; k < state.size(); ++k)
    (state[k] == BoundState::free ? free : held).push_back(static_cast<Eigen::Index>(k));
  VectorX<Scalar> out = x;
  if (free.empty()) return out;
  const MatrixX<Scalar> neg_hff = -H(free, free);
  VectorX<Scalar> rhs = g(free);
  if (!held.empty()) rhs += H(free, held) * x(held);
  Eigen::LLT<MatrixX<Scalar>> llt(neg_hff);
  if (llt.info() != Eigen::Success) {
    throw SolverError("box QP: reduced Hessian is not negative definite");
  }
  const VectorX<Scalar> sol = llt.solve(rhs);
  out(free) = sol;
  return out;
}

}  // namespace detail

// Maximizes g'x + x'Hx/2 subject to lo <= x <= hi for negative definite H.
//
// Primal active-set iteration: start from the clipped Newton point, re-solve
// the equality-constrained problem on the working set, step to the first
// blocking bound when infeasible, and release the bound with the most
// negative multiplier once the step vanishes.
template <typename Scalar>
BoxQpResult<Scalar> maximize_box_qp(const MatrixX<Scalar>& H, const VectorX<Scalar>& g,
                                    const VectorX<Scalar>& lo, const VectorX<Scalar>& hi,
                                    int max_working_set_changes = -1) {
  const Eigen::Index n = g.size();
  if (H.rows() != n || H.cols() != n || lo.size() != n || hi.size() != n) {
    throw std::invalid_argument("maximize_box_qp: dimension mismatch");
  }
  if (!(lo.array() <= hi.array()).all()) throw DomainError("maximize_box_qp: lo > hi");
  if (max_working_set_changes < 0) {
    max_working_set_changes = (n < 20 ? (1 << n) : (1 << 20)) + 10;
  }
  const Scalar eps = Scalar(64) * std::numeric_limits<Scalar>::epsilon();

  BoxQpResult<Scalar> res;
  res.state.assign(n, BoundState::free);
  std::vector<bool> pinned(n, false);  // lo == hi
  VectorX<Scalar> x = VectorX<Scalar>::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (hi[k] - lo[k] <= eps * std::max(Scalar(1), std::abs(hi[k]))) {
      pinned[k] = true;
      res.state[k] = BoundState::lower;
      x[k] = lo[k];
    }
  }
  x = detail::equality_qp(H, g, x, res.state);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (pinned[k]) continue;
    if (x[k] <= lo[k]) {
      x[k] = lo[k];
      res.state[k] = BoundState::lower;
    } else if (x[k] >= hi[k]) {
      x[k] = hi[k];
      res.state[k] = BoundState::upper;
    }
  }

  int changes = 0;
  for (;;) {
    const VectorX<Scalar> target = detail::equality_qp(H, g, x, res.state);
    const VectorX<Scalar> step = target - x;
    const Scalar scale = std::max(Scalar(1), x.cwiseAbs().maxCoeff());
    if (step.cwiseAbs().maxCoeff() <= eps * scale) {
      x = target;
      const VectorX<Scalar> grad = g + H * x;
      Eigen::Index worst = -1;
      Scalar worst_mult = -Scalar(1e-13) * std::max(Scalar(1), grad.cwiseAbs().maxCoeff());
      for (Eigen::Index k = 0; k < n; ++k) {
        if (pinned[k] || res.state[k] == BoundState::free) continue;
        const Scalar mult = res.state[k] == BoundState::upper ? grad[k] : -grad[k];
        if (mult < worst_mult) {
          worst_mult = mult;
          worst = k;
        }
      }
      if (worst < 0) break;
      res.state[worst] = BoundState::free;
    } else {
      Scalar alpha = Scalar(1);
      Eigen::Index blocking = -1;
      BoundState blocking_state = BoundState::free;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (res.state[k] != BoundState::free) continue;
        if (step[k] > 0 && target[k] > hi[k]) {
          const Scalar a = (hi[k] - x[k]) / step[k];
          if (a < alpha) {
            alpha = a;
            blocking = k;
            blocking_state = BoundState::upper;
          }
        } else if (step[k] < 0 && target[k] < lo[k]) {
          const Scalar a = (lo[k] - x[k]) / step[k];
          if (a < alpha) {
            alpha = a;
            blocking = k;
            blocking_state = BoundState::lower;
          }
        }
      }
      alpha = std::max(alpha, Scalar(0));
      x += alpha * step;
      if (blocking < 0) continue;
      x[blocking] = blocking_state == BoundState::upper ? hi[blocking] : lo[blocking];
      res.state[blocking] = blocking_state;
    }
    if (++changes > max_working_set_changes) {
      throw SolverError(fmt::format("box QP: no convergence after {} working-set changes",
                                    max_working_set_changes));
    }
  }
  res.x = x.cwiseMax(lo).cwiseMin(hi);
  res.gradient = g + H * res.x;
  res.objective = g.dot(res.x) + Scalar(0.5) * res.x.dot(H * res.x);
  res.working_set_changes = changes;
  return res;
}

}  // namespace rmsim
