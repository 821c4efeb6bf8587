#pragma once

#include "sparseoc/dca.hpp"
#include "sparseoc/problem.hpp"

#include <string>

namespace sparseoc {

/// Right-hand side convention of the adjoint row of the reweighted system.
/// `adjoint_consistent` solves E phi = y - y_d; `as_printed` solves
/// E phi - y = y_d, which flips the sign of the data.
enum class Row2Sign { adjoint_consistent, as_printed };

const char* to_string(Row2Sign sign);
Row2Sign row2_sign_from_string(const std::string& name);

struct PDParams {
  double epsilon = 1e-4;
  double p = 2.0;
  double beta = 0.0;
  int max_iter = 100;
  double rel_tol = 1e-10;
  Row2Sign sign = Row2Sign::adjoint_consistent;
  bool fixed_iterations = false;
};

/// D_k = (beta/p) / max(eps^{2-1/p}, |u_k|^{2-1/p}), pointwise.
Vector pd_reweighting(const Field& u, const PDParams& pd);

/// Reweighted primal-dual iteration for
///   min 1/2|y - y_d|^2 + kappa/2 |grad u|^2 + alpha/2 |u|^2 + beta Upsilon_p(u)
/// with D_k = (beta/p) / max(eps^{2-1/p}, |u_k|^{2-1/p}). Each step solves
/// (kappa K + alpha + D_k + S*S) u = -S*(S f - y_d) by preconditioned CG.
/// Records carry the true (unsmoothed) cost and the relative step size.
SolveReport pd_solve(const ControlProblem& problem, const PDParams& pd, const Field& u0);

/// Minimizer of the smooth part alone (beta = 0, no box).
Field solve_unpenalized(const ControlProblem& problem);

enum class RegularizationMeasure { exact_sup, sampled };

const char* to_string(RegularizationMeasure m);
RegularizationMeasure measure_from_string(const std::string& name);

/// sup_t | |t|^{1/p} - huber(t)^{1/p} |. The sampled variant takes the
/// maximum over t in {0, 0.005, ..., 1}.
double huber_regularization_error(double p, double gamma,
                                  RegularizationMeasure m = RegularizationMeasure::exact_sup);

/// Same for the smoothed quasinorm implied by the PD reweighting, which
/// replaces |t|^{1/p} by a quadratic on |t| < eps.
double pd_regularization_error(double p, double epsilon,
                               RegularizationMeasure m = RegularizationMeasure::exact_sup);

struct MatchedRegularization {
  double gamma = 0.0;
  double epsilon = 0.0;
};

/// gamma and epsilon whose regularization errors equal target_re.
MatchedRegularization match_regularization(double p, double target_re,
                                           RegularizationMeasure m = RegularizationMeasure::exact_sup);

}  // namespace sparseoc
