#pragma once

#include "sparseoc/grid.hpp"
#include "sparseoc/problem.hpp"

#include <limits>
#include <optional>
#include <stdexcept>

namespace sparseoc {

inline double soft_threshold(double v, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("soft_threshold: lambda must be >= 0");
  if (v > lambda) return v - lambda;
  if (v < -lambda) return v + lambda;
  return 0.0;
}

inline double project_box(double v, double lower, double upper) {
  if (lower > upper) throw std::invalid_argument("project_box: lower > upper");
  return std::min(std::max(v, lower), upper);
}

/// Pointwise violation of 0 in g + lambda d|u| + N_box(u), measured as the
/// distance of -g to the admissible interval and divided by lambda when
/// lambda > 0. Returns the maximum over nodes.
double inclusion_residual(const Field& u, const Field& g, double lambda,
                          const std::optional<BoxConstraints>& box);

struct LipschitzEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;  // false: conservative fallback bound was used
};

/// Upper bound on the largest eigenvalue of u -> S*S u + alpha u (+ kappa
/// gradient term) in the quadrature metric: 1.05 times the power-iteration
/// estimate for the operator part, plus alpha.
LipschitzEstimate lipschitz_estimate(const ControlProblem& problem, int max_iter = 500);

struct SubproblemOptions {
  double tol = 1e-8;
  int max_iter = 5000;
  /// Step-size constant; estimated when absent.
  std::optional<double> lipschitz;
};

struct SubproblemResult {
  Field u;
  int inner_iterations = 0;
  double kkt_residual = std::numeric_limits<double>::infinity();
  double objective = 0.0;
  double initial_objective = 0.0;
  bool converged = false;
  double lipschitz = 0.0;
};

/// Minimizes F(u) - <shift, u> + beta delta |u|_1 over the problem's box by
/// FISTA with function-value restart. The DC outer loop passes
/// shift = beta * w_k.
SubproblemResult solve_l1(const ControlProblem& problem, const Field& shift, const Field& u_init,
                          const SubproblemOptions& options = {});

}  // namespace sparseoc
