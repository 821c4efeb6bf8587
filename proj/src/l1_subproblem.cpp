#include "sparseoc/l1_subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sparseoc {

double inclusion_residual(const Field& u, const Field& g, double lambda,
                          const std::optional<BoxConstraints>& box) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (Index k = 0; k < u.size(); ++k) {
    double lo = u[k] > 0.0 ? lambda : -lambda;
    double hi = u[k] < 0.0 ? -lambda : lambda;
    if (box) {
      if (u[k] <= box->lower()[k]) lo = -inf;
      if (u[k] >= box->upper()[k]) hi = inf;
    }
    const double target = -g[k];
    const double d = std::max({lo - target, target - hi, 0.0});
    worst = std::max(worst, d);
  }
  return lambda > 0.0 ? worst / lambda : worst;
}

namespace {

// Hessian of the smooth part without the alpha shift, u -> S*S u + kappa K u.
Field apply_hessian(const ControlProblem& problem, const Field& v) {
  Field out = problem.adjoint(problem.control_to_state(v));
  if (problem.gradient_weight() > 0.0) out += problem.gradient_weight() * problem.gradient_energy_gradient(v);
  return out;
}

double conservative_bound(const ControlProblem& problem) {
  const Vector& c = problem.grid().weights();
  const double lmin = problem.op().smallest_eigenvalue();
  const double ratio = c.maxCoeff() / c.minCoeff();
  return ratio / (lmin * lmin) + problem.gradient_weight() * 8.0 / c.minCoeff();
}

}  // namespace

LipschitzEstimate lipschitz_estimate(const ControlProblem& problem, int max_iter) {
  const Grid& grid = problem.grid();
  std::mt19937 rng(20170611u);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Field v(grid.size());
  for (Index k = 0; k < v.size(); ++k) v[k] = unit(rng);
  v /= norm_l2(grid, v);

  LipschitzEstimate est;
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const Field tv = apply_hessian(problem, v);
    const double norm = norm_l2(grid, tv);
    est.iterations = it;
    if (norm == 0.0) break;
    v = tv / norm;
    if (it > 1 && std::abs(norm - prev) <= 1e-7 * norm) {
      est.converged = true;
      est.value = 1.05 * norm + problem.params().alpha();
      return est;
    }
    prev = norm;
  }
  est.value = conservative_bound(problem) + problem.params().alpha();
  return est;
}

namespace {

struct Objective {
  const ControlProblem& problem;
  const Field& shift;
  const Field& y0;  // S f - y_d
  double lambda;

  double operator()(const Field& u, const Field& su) const {
    const Grid& grid = problem.grid();
    double val = 0.5 * norm_l2_sq(grid, su + y0) + 0.5 * problem.params().alpha() * norm_l2_sq(grid, u) -
                 inner(grid, shift, u) + lambda * norm_l1(grid, u);
    if (problem.gradient_weight() > 0.0) val += problem.gradient_weight() * problem.gradient_energy(u);
    return val;
  }
};

}  // namespace

SubproblemResult solve_l1(const ControlProblem& problem, const Field& shift, const Field& u_init,
                          const SubproblemOptions& options) {
  const Grid& grid = problem.grid();
  require_on_grid(grid, shift, "solve_l1 shift");
  require_on_grid(grid, u_init, "solve_l1 u_init");
  if (!(options.tol > 0.0)) throw std::invalid_argument("solve_l1: tol must be > 0");
  if (options.max_iter < 0) throw std::invalid_argument("solve_l1: max_iter must be >= 0");

  const auto& box = problem.box();
  const double alpha = problem.params().alpha();
  const double kappa = problem.gradient_weight();
  const double lambda = problem.params().l1_weight();

  const Field y0 = problem.control_to_state(problem.f()) - problem.y_d();
  const Field r0 = problem.adjoint(y0);
  const Objective objective{problem, shift, y0, lambda};

  auto gradient = [&](const Field& x, const Field& qx) {
    Field g = qx + r0 + alpha * x - shift;
    if (kappa > 0.0) g += kappa * problem.gradient_energy_gradient(x);
    return g;
  };
  auto prox = [&](const Field& v, double step_lambda) {
    Field out(v.size());
    for (Index k = 0; k < v.size(); ++k) {
      out[k] = soft_threshold(v[k], step_lambda);
      if (box) out[k] = project_box(out[k], box->lower()[k], box->upper()[k]);
    }
    return out;
  };

  double L = options.lipschitz ? *options.lipschitz : lipschitz_estimate(problem).value;
  if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("solve_l1: invalid Lipschitz constant");

  Field u = box ? box->project(u_init) : u_init;
  Field su = problem.control_to_state(u);
  Field qu = problem.adjoint(su);
  double obj = objective(u, su);

  SubproblemResult res;
  res.initial_objective = objective(u_init, problem.control_to_state(u_init));
  res.kkt_residual = inclusion_residual(u, gradient(u, qu), lambda, box);

  const Field u_start = u;
  const double obj_start = obj;
  const double residual_start = res.kkt_residual;
  Field u_prev = u, qu_prev = qu;
  double t = 1.0;
  bool momentum = false;
  int it = 0;
  while (res.kkt_residual > options.tol && it < options.max_iter) {
    ++it;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double m = momentum ? (t - 1.0) / t_next : 0.0;
    const Field x = u + m * (u - u_prev);
    const Field qx = qu + m * (qu - qu_prev);

    const Field u_new = prox(x - gradient(x, qx) / L, lambda / L);
    const Field su_new = problem.control_to_state(u_new);
    const double obj_new = objective(u_new, su_new);
    if (!std::isfinite(obj_new)) throw SolverError("solve_l1: non-finite objective", obj_new);

    if (obj_new > obj + 1e-14 * std::max(1.0, std::abs(obj))) {
      if (m > 0.0) {
        momentum = false;
        t = 1.0;
      } else {
        L *= 2.0;
      }
      continue;
    }

    u_prev = std::move(u);
    qu_prev = std::move(qu);
    u = u_new;
    su = su_new;
    qu = problem.adjoint(su);
    obj = obj_new;
    t = momentum ? t_next : 1.0;
    momentum = true;
    res.kkt_residual = inclusion_residual(u, gradient(u, qu), lambda, box);
  }

  // Accumulated roundoff slack must not leave us measurably above the start.
  if (obj > obj_start + 1e-14 * std::max(1.0, std::abs(obj_start))) {
    u = u_start;
    obj = obj_start;
    res.kkt_residual = residual_start;
  }
  res.u = std::move(u);
  res.objective = obj;
  res.inner_iterations = it;
  res.converged = res.kkt_residual <= options.tol;
  res.lipschitz = L;
  return res;
}

}  // namespace sparseoc
