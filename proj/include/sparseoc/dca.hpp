#pragma once

#include "sparseoc/grid.hpp"
#include "sparseoc/l1_subproblem.hpp"
#include "sparseoc/penalty.hpp"
#include "sparseoc/problem.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sparseoc {

/// One row of the outer iteration table.
struct IterationRecord {
  int k = 0;
  double cost = 0.0;      // J_gamma(u_k)
  double residual = 0.0;  // stationarity residual at u_k
  double zeta_gap = 0.0;  // |zeta_k - zeta_{k-1}| in the weighted L2 norm
  Index null_entries = 0;
  int inner_iterations = 0;
  double elapsed_seconds = 0.0;
  double inner_tol = 0.0;
  bool inner_converged = true;
};

struct KKTResiduals {
  double gradient_eq = 0.0;
  double zeta_bound = 0.0;
  double sign_consistency = 0.0;
  double complementarity = 0.0;
};

struct SolveReport {
  std::vector<IterationRecord> iterations;
  Field u, y, phi, zeta, w;
  bool converged = false;
  std::string stop_reason;
  KKTResiduals kkt;
  double residual = 0.0;
  CostBreakdown cost;
  double initial_cost = 0.0;
  double initial_residual = 0.0;
};

struct DcaOptions {
  double outer_tol = 1e-6;
  int max_outer = 200;
  double zeta_gap_tol = 1e-8;
  double min_inner_tol = 1e-10;
  int inner_max_iter = 5000;
  /// Run all max_outer iterations regardless of the stopping tests.
  bool fixed_iterations = false;
};

struct Stationarity {
  double residual = 0.0;
  Field zeta;
};

/// zeta = (beta w - grad F)/(beta delta) and the pointwise violation of the
/// first-order system (support: zeta = sign(u); off support: |zeta| <= 1;
/// box-active nodes exempt in the direction of the bound). Falls back to the
/// max-norm of the gradient when beta delta = 0.
Stationarity stationarity_residual(const ControlProblem& problem, const Field& u, const Field& grad_f,
                                   const Field& w);

KKTResiduals kkt_residuals(const ControlProblem& problem, const Field& u, const Field& grad_f, const Field& w);

SolveReport dca_solve(const ControlProblem& problem, const Field& u0, const DcaOptions& options = {});

/// M^{(p-1)/p} |S*(S f - y_d)|_inf. For beta above this value u = 0 is a
/// local minimizer.
double null_beta_threshold(const ControlProblem& problem, double M);

/// Number of nodes with |u_i| <= tol.
Index sparsity_count(const Field& u, double tol = 0.0);

}  // namespace sparseoc
