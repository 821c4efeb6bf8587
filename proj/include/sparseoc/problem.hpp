#pragma once

#include "sparseoc/elliptic.hpp"
#include "sparseoc/grid.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace sparseoc {

/// Parameters of the penalized cost: exponent denominator p (the penalty is
/// |u|^{1/p}), Huber parameter gamma, Tikhonov weight alpha and sparsity
/// weight beta. delta = gamma^{(p-1)/p} / p^{1/p} is derived on construction.
class PenaltyParams {
 public:
  PenaltyParams(double p, double gamma, double alpha, double beta)
      : p_(p), gamma_(gamma), alpha_(alpha), beta_(beta) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("PenaltyParams: p must be >= 1");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("PenaltyParams: gamma must be > 0");
    if (!(alpha >= 0.0)) throw std::invalid_argument("PenaltyParams: alpha must be >= 0");
    if (!(beta >= 0.0)) throw std::invalid_argument("PenaltyParams: beta must be >= 0");
    delta_ = p == 1.0 ? 1.0 : std::pow(gamma, (p - 1.0) / p) / std::pow(p, 1.0 / p);
  }

  double p() const { return p_; }
  double gamma() const { return gamma_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double delta() const { return delta_; }

  /// Weight of the L1 term in the convex part, beta * delta.
  double l1_weight() const { return beta_ * delta_; }
  /// |v| <= 1/gamma is the polynomial branch of the Huber function.
  double junction() const { return 1.0 / gamma_; }
  /// Offset (1/gamma)(1-p)/p of the linear branch.
  double offset() const { return (1.0 - p_) / (p_ * gamma_); }

  PenaltyParams with_p(double p) const { return {p, gamma_, alpha_, beta_}; }
  PenaltyParams with_gamma(double gamma) const { return {p_, gamma, alpha_, beta_}; }
  PenaltyParams with_alpha(double alpha) const { return {p_, gamma_, alpha, beta_}; }
  PenaltyParams with_beta(double beta) const { return {p_, gamma_, alpha_, beta}; }

 private:
  double p_;
  double gamma_;
  double alpha_;
  double beta_;
  double delta_ = 1.0;
};

/// Pointwise bounds lower <= u <= upper with lower <= 0 <= upper.
class BoxConstraints {
 public:
  BoxConstraints(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size()) throw std::invalid_argument("BoxConstraints: size mismatch");
    for (Index k = 0; k < lower_.size(); ++k) {
      if (!(lower_[k] <= 0.0 && upper_[k] >= 0.0 && lower_[k] < upper_[k])) {
        throw std::invalid_argument("BoxConstraints: need lower <= 0 <= upper and lower < upper at node " +
                                    std::to_string(k));
      }
    }
  }

  static BoxConstraints uniform(const Grid& grid, double lower, double upper) {
    return {grid.constant(lower), grid.constant(upper)};
  }

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  Index size() const { return lower_.size(); }

  Vector project(const Vector& u) const { return u.cwiseMax(lower_).cwiseMin(upper_); }

 private:
  Vector lower_;
  Vector upper_;
};

/// Discretized optimal control problem
///
///   min 1/2 |y - y_d|^2 + alpha/2 |u|^2 + kappa/2 |grad u|^2 + beta * penalty(u)
///   s.t. A y = u + f,  u in box (optional)
///
/// with all norms taken in the quadrature-weighted inner product. The
/// gradient term (kappa > 0) is only used by the H1-penalized comparison
/// problem.
class ControlProblem {
 public:
  ControlProblem(std::shared_ptr<const Grid> grid, EllipticOperatorSpec op_spec, Field y_d, Field f,
                 PenaltyParams params, std::optional<BoxConstraints> box = std::nullopt,
                 SolverKind solver = SolverKind::conjugate_gradient, double gradient_weight = 0.0)
      : grid_(std::move(grid)),
        solver_(EllipticOperator(*grid_, op_spec), solver),
        laplacian_(*grid_, EllipticOperatorSpec{}),
        y_d_(std::move(y_d)),
        f_(std::move(f)),
        params_(params),
        box_(std::move(box)),
        gradient_weight_(gradient_weight) {
    require_on_grid(*grid_, y_d_, "ControlProblem y_d");
    require_on_grid(*grid_, f_, "ControlProblem f");
    if (box_) require_on_grid(*grid_, box_->lower(), "ControlProblem box");
    if (!(gradient_weight >= 0.0)) throw std::invalid_argument("ControlProblem: gradient weight must be >= 0");
    if (!y_d_.allFinite() || !f_.allFinite()) throw std::invalid_argument("ControlProblem: non-finite data");
  }

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  const EllipticSolver& solver() const { return solver_; }
  const EllipticOperator& op() const { return solver_.op(); }
  const Field& y_d() const { return y_d_; }
  const Field& f() const { return f_; }
  const PenaltyParams& params() const { return params_; }
  const std::optional<BoxConstraints>& box() const { return box_; }
  double gradient_weight() const { return gradient_weight_; }

  ControlProblem with_params(const PenaltyParams& params) const {
    ControlProblem copy = *this;
    copy.params_ = params;
    return copy;
  }

  ControlProblem with_box(std::optional<BoxConstraints> box) const {
    ControlProblem copy = *this;
    if (box) require_on_grid(*grid_, box->lower(), "ControlProblem box");
    copy.box_ = std::move(box);
    return copy;
  }

  /// S v: solves A y = v.
  Field control_to_state(const Field& v) const { return solver_.solve(v); }

  /// Adjoint of S in the quadrature inner product, W^{-1} A^{-1} W r. For
  /// uniform weights this is the plain solve A phi = r.
  Field adjoint(const Field& r) const {
    if (grid_->rule() == QuadratureRule::uniform) return solver_.solve(r);
    const Vector& w = grid_->weights();
    Vector z = solver_.solve(w.cwiseProduct(r));
    return z.cwiseQuotient(w);
  }

  /// Gradient (in the quadrature metric) of 1/2 |grad u|^2 = h^2/2 u^T L u,
  /// L the 5-point Laplacian.
  Field gradient_energy_gradient(const Field& u) const {
    const double h2 = grid_->h() * grid_->h();
    return (h2 * laplacian_.apply(u)).cwiseQuotient(grid_->weights());
  }

  double gradient_energy(const Field& u) const {
    const double h2 = grid_->h() * grid_->h();
    return 0.5 * h2 * u.dot(laplacian_.apply(u));
  }

  const EllipticOperator& laplacian() const { return laplacian_; }

 private:
  std::shared_ptr<const Grid> grid_;
  EllipticSolver solver_;
  EllipticOperator laplacian_;
  Field y_d_;
  Field f_;
  PenaltyParams params_;
  std::optional<BoxConstraints> box_;
  double gradient_weight_;
};

/// y = S(u + f).
inline Field solve_state(const ControlProblem& problem, const Field& u) {
  require_on_grid(problem.grid(), u, "solve_state");
  return problem.control_to_state(u + problem.f());
}

/// phi = S*(y - y_d), the adjoint state.
inline Field solve_adjoint(const ControlProblem& problem, const Field& y) {
  require_on_grid(problem.grid(), y, "solve_adjoint");
  return problem.adjoint(y - problem.y_d());
}

}  // namespace sparseoc
