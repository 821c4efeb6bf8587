#include "sparseoc/dca.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace sparseoc {

namespace {

bool at_bound(const std::optional<BoxConstraints>& box, const Field& u, Index k) {
  return box && (u[k] <= box->lower()[k] || u[k] >= box->upper()[k]);
}

}  // namespace

Stationarity stationarity_residual(const ControlProblem& problem, const Field& u, const Field& grad_f,
                                   const Field& w) {
  const double beta = problem.params().beta();
  const double lambda = problem.params().l1_weight();
  const Field g = grad_f - beta * w;
  Stationarity st;
  st.residual = inclusion_residual(u, g, lambda, problem.box());
  if (lambda > 0.0) {
    st.zeta = -g / lambda;
    for (Index k = 0; k < u.size(); ++k) {
      if (at_bound(problem.box(), u, k)) st.zeta[k] = std::clamp(st.zeta[k], -1.0, 1.0);
    }
  } else {
    st.zeta = Field::Zero(u.size());
  }
  return st;
}

KKTResiduals kkt_residuals(const ControlProblem& problem, const Field& u, const Field& grad_f, const Field& w) {
  const auto& box = problem.box();
  const double lambda = problem.params().l1_weight();
  const Field g = grad_f - problem.params().beta() * w;
  KKTResiduals r;
  for (Index k = 0; k < u.size(); ++k) {
    const double s = sign(u[k]);
    const bool active = at_bound(box, u, k);
    if (s != 0.0 && !active) {
      const double eq = g[k] + lambda * s;
      r.gradient_eq = std::max(r.gradient_eq, std::abs(eq));
      if (lambda > 0.0) r.sign_consistency = std::max(r.sign_consistency, std::abs(-g[k] / lambda - s));
    }
    if (s == 0.0 && !active) {
      const double excess = lambda > 0.0 ? std::abs(g[k]) / lambda - 1.0 : std::abs(g[k]);
      r.zeta_bound = std::max(r.zeta_bound, excess);
    }
    if (box) {
      const double zhat = s != 0.0 ? s : (lambda > 0.0 ? std::clamp(-g[k] / lambda, -1.0, 1.0) : 0.0);
      const double eq = g[k] + lambda * zhat;
      const double la = std::max(eq, 0.0);
      const double lb = std::max(-eq, 0.0);
      r.complementarity = std::max({r.complementarity, la * (u[k] - box->lower()[k]),
                                    lb * (box->upper()[k] - u[k])});
    }
  }
  return r;
}

Index sparsity_count(const Field& u, double tol) {
  if (tol < 0.0) throw std::invalid_argument("sparsity_count: tol must be >= 0");
  return (u.array().abs() <= tol).count();
}

double null_beta_threshold(const ControlProblem& problem, double M) {
  if (!(M > 0.0)) throw std::invalid_argument("null_beta_threshold: M must be > 0");
  const Field sf = problem.control_to_state(problem.f());
  const Field phi0 = problem.adjoint(sf - problem.y_d());
  const double p = problem.params().p();
  return std::pow(M, (p - 1.0) / p) * max_abs(phi0);
}

SolveReport dca_solve(const ControlProblem& problem, const Field& u0, const DcaOptions& options) {
  using clock = std::chrono::steady_clock;
  const Grid& grid = problem.grid();
  require_on_grid(grid, u0, "dca_solve u0");
  if (!(options.outer_tol > 0.0)) throw std::invalid_argument("dca_solve: outer_tol must be > 0");
  if (options.max_outer < 0) throw std::invalid_argument("dca_solve: max_outer must be >= 0");
  if (!u0.allFinite()) throw std::invalid_argument("dca_solve: non-finite initial control");

  const PenaltyParams& pp = problem.params();
  const bool convex = pp.p() == 1.0 || pp.beta() == 0.0;
  const double lipschitz = lipschitz_estimate(problem).value;

  SolveReport rep;
  rep.u = problem.box() ? problem.box()->project(u0) : u0;

  auto evaluate = [&](SolveReport& r) {
    r.y = solve_state(problem, r.u);
    const SmoothCost sc = cost_smooth(problem, r.u, r.y);
    r.phi = sc.phi;
    r.w = w_field(r.u, pp);
    Stationarity st = stationarity_residual(problem, r.u, sc.gradient, r.w);
    r.residual = st.residual;
    r.zeta = std::move(st.zeta);
    r.cost = cost_Jgamma(problem, r.u);
    r.kkt = kkt_residuals(problem, r.u, sc.gradient, r.w);
    if (!r.u.allFinite() || !r.y.allFinite() || !r.phi.allFinite() || !std::isfinite(r.residual)) {
      throw SolverError("dca_solve: non-finite iterate", r.residual);
    }
  };

  evaluate(rep);
  rep.initial_cost = rep.cost.total;
  rep.initial_residual = rep.residual;
  rep.stop_reason = "max_outer";
  if (!options.fixed_iterations && rep.residual <= options.outer_tol) {
    rep.converged = true;
    rep.stop_reason = "stationary";
    return rep;
  }

  for (int k = 1; k <= options.max_outer; ++k) {
    const auto start = clock::now();
    const double inner_tol =
        convex ? 0.1 * options.outer_tol : std::max(options.min_inner_tol, 0.1 * rep.residual);
    SubproblemOptions sub;
    sub.tol = inner_tol;
    sub.max_iter = options.inner_max_iter;
    sub.lipschitz = lipschitz;
    SubproblemResult res = solve_l1(problem, pp.beta() * rep.w, rep.u, sub);

    const Field zeta_prev = rep.zeta;
    rep.u = std::move(res.u);
    evaluate(rep);

    IterationRecord rec;
    rec.k = k;
    rec.cost = rep.cost.total;
    rec.residual = rep.residual;
    rec.zeta_gap = norm_l2(grid, rep.zeta - zeta_prev);
    rec.null_entries = sparsity_count(rep.u);
    rec.inner_iterations = res.inner_iterations;
    rec.inner_tol = inner_tol;
    rec.inner_converged = res.converged;
    rec.elapsed_seconds = std::chrono::duration<double>(clock::now() - start).count();
    rep.iterations.push_back(rec);

    if (options.fixed_iterations) continue;
    if (rep.residual <= options.outer_tol) {
      rep.converged = true;
      rep.stop_reason = "stationary";
      break;
    }
    if (rec.zeta_gap < options.zeta_gap_tol) {
      rep.stop_reason = "stagnation";
      break;
    }
  }
  if (options.fixed_iterations) {
    rep.converged = rep.residual <= options.outer_tol;
    rep.stop_reason = "fixed_iterations";
  }
  return rep;
}

}  // namespace sparseoc
