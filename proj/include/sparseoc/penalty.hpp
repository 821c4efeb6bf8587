#pragma once

#include "sparseoc/grid.hpp"
#include "sparseoc/problem.hpp"

#include <algorithm>
#include <cmath>

namespace sparseoc {

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Huber-type splice of |v|: polynomial gamma^{p-1}/p |v|^p inside the
// junction 1/gamma, shifted absolute value outside. Minorizes |v|.
inline double huber(double v, const PenaltyParams& pp) {
  const double a = std::abs(v);
  if (a <= pp.junction()) {
    if (pp.p() == 1.0) return a;
    return std::pow(pp.gamma(), pp.p() - 1.0) / pp.p() * std::pow(a, pp.p());
  }
  return a + pp.offset();
}

/// Integrand of the regularized penalty, huber(v)^{1/p}.
inline double huber_root(double v, const PenaltyParams& pp) {
  return std::pow(std::max(huber(v, pp), 0.0), 1.0 / pp.p());
}

// j(z) = delta |z| - huber(z)^{1/p}, written out on the linear branch where it
// is nonzero.
inline double j_value(double z, const PenaltyParams& pp) {
  const double a = std::abs(z);
  if (pp.p() == 1.0 || a <= pp.junction()) return 0.0;
  return pp.delta() * a - std::pow(a + pp.offset(), 1.0 / pp.p());
}

inline double j_prime(double z, const PenaltyParams& pp) {
  const double a = std::abs(z);
  if (pp.p() == 1.0 || a <= pp.junction()) return 0.0;
  const double p = pp.p();
  return sign(z) * (pp.delta() - std::pow(a + pp.offset(), (1.0 - p) / p) / p);
}

inline Field w_field(const Field& u, const PenaltyParams& pp) {
  return u.unaryExpr([&pp](double v) { return j_prime(v, pp); });
}

inline double upsilon_p(const Grid& grid, const Field& u, const PenaltyParams& pp) {
  require_on_grid(grid, u, "upsilon_p");
  const double q = 1.0 / pp.p();
  return integrate(grid, u.unaryExpr([q](double v) { return std::pow(std::abs(v), q); }));
}

inline double upsilon_pg(const Grid& grid, const Field& u, const PenaltyParams& pp) {
  require_on_grid(grid, u, "upsilon_pg");
  return integrate(grid, u.unaryExpr([&pp](double v) { return huber_root(v, pp); }));
}

/// Smooth part of the cost with its gradient in the quadrature metric.
struct SmoothCost {
  double value = 0.0;
  double tracking = 0.0;
  double tikhonov = 0.0;
  double control_gradient = 0.0;
  Field gradient;
  Field phi;
};

/// F(u) = 1/2|y - y_d|^2 + alpha/2 |u|^2 (+ kappa/2 |grad u|^2), y = S(u + f).
inline SmoothCost cost_smooth(const ControlProblem& problem, const Field& u, const Field& y) {
  const Grid& grid = problem.grid();
  require_on_grid(grid, u, "cost_smooth u");
  require_on_grid(grid, y, "cost_smooth y");
  const double alpha = problem.params().alpha();
  const double kappa = problem.gradient_weight();
  SmoothCost out;
  out.tracking = 0.5 * norm_l2_sq(grid, y - problem.y_d());
  out.tikhonov = 0.5 * alpha * norm_l2_sq(grid, u);
  out.phi = solve_adjoint(problem, y);
  out.gradient = out.phi + alpha * u;
  if (kappa > 0.0) {
    out.control_gradient = kappa * problem.gradient_energy(u);
    out.gradient += kappa * problem.gradient_energy_gradient(u);
  }
  out.value = out.tracking + out.tikhonov + out.control_gradient;
  return out;
}

struct CostBreakdown {
  double tracking = 0.0;
  double tikhonov = 0.0;
  double control_gradient = 0.0;
  double sparsity = 0.0;
  double total = 0.0;
};

namespace detail {

inline CostBreakdown smooth_breakdown(const ControlProblem& problem, const Field& u) {
  const Grid& grid = problem.grid();
  const Field y = solve_state(problem, u);
  CostBreakdown c;
  c.tracking = 0.5 * norm_l2_sq(grid, y - problem.y_d());
  c.tikhonov = 0.5 * problem.params().alpha() * norm_l2_sq(grid, u);
  if (problem.gradient_weight() > 0.0) c.control_gradient = problem.gradient_weight() * problem.gradient_energy(u);
  return c;
}

inline CostBreakdown finish(CostBreakdown c) {
  c.total = c.tracking + c.tikhonov + c.control_gradient + c.sparsity;
  return c;
}

}  // namespace detail

/// J(u) with the exact quasinorm penalty.
inline CostBreakdown cost_J(const ControlProblem& problem, const Field& u) {
  CostBreakdown c = detail::smooth_breakdown(problem, u);
  c.sparsity = problem.params().beta() * upsilon_p(problem.grid(), u, problem.params());
  return detail::finish(c);
}

/// J_gamma(u) with the Huber-regularized penalty.
inline CostBreakdown cost_Jgamma(const ControlProblem& problem, const Field& u) {
  CostBreakdown c = detail::smooth_breakdown(problem, u);
  c.sparsity = problem.params().beta() * upsilon_pg(problem.grid(), u, problem.params());
  return detail::finish(c);
}

/// Convex part G = F + beta delta |u|_1.
inline double dc_G(const ControlProblem& problem, const Field& u) {
  const CostBreakdown c = detail::smooth_breakdown(problem, u);
  return c.tracking + c.tikhonov + c.control_gradient +
         problem.params().l1_weight() * norm_l1(problem.grid(), u);
}

/// Concave part H = beta * integral of j(u); G - H = J_gamma.
inline double dc_H(const ControlProblem& problem, const Field& u) {
  const PenaltyParams& pp = problem.params();
  require_on_grid(problem.grid(), u, "dc_H");
  return pp.beta() * integrate(problem.grid(), u.unaryExpr([&pp](double v) { return j_value(v, pp); }));
}

}  // namespace sparseoc
