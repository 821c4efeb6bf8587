#include "sparseoc/pd_baseline.hpp"

#include "sparseoc/penalty.hpp"

#include <Eigen/SparseCholesky>

#include <chrono>
#include <cmath>
#include <functional>
#include <vector>

namespace sparseoc {

const char* to_string(Row2Sign sign) {
  return sign == Row2Sign::adjoint_consistent ? "adjoint_consistent" : "as_printed";
}

Row2Sign row2_sign_from_string(const std::string& name) {
  if (name == "adjoint_consistent") return Row2Sign::adjoint_consistent;
  if (name == "as_printed") return Row2Sign::as_printed;
  throw std::invalid_argument("unknown row-2 sign '" + name + "'");
}

const char* to_string(RegularizationMeasure m) {
  return m == RegularizationMeasure::exact_sup ? "exact_sup" : "sampled";
}

RegularizationMeasure measure_from_string(const std::string& name) {
  if (name == "exact_sup") return RegularizationMeasure::exact_sup;
  if (name == "sampled") return RegularizationMeasure::sampled;
  throw std::invalid_argument("unknown regularization measure '" + name + "'");
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Symmetric form of the reweighted operator: W times the metric-form operator,
//   kappa h^2 E + alpha W + W D + A^{-1} W A^{-1}.
class ReweightedSystem {
 public:
  ReweightedSystem(const ControlProblem& problem, const Vector& d) : problem_(problem) {
    const Grid& grid = problem.grid();
    const Vector& c = grid.weights();
    const double h2 = grid.h() * grid.h();
    diag_ = problem.params().alpha() * c + c.cwiseProduct(d);
    SpMat p(grid.size(), grid.size());
    if (problem.gradient_weight() > 0.0) p = problem.gradient_weight() * h2 * problem.laplacian().matrix();
    std::vector<Eigen::Triplet<double>> diag;
    for (Index k = 0; k < grid.size(); ++k) diag.emplace_back(k, k, diag_[k]);
    SpMat dm(grid.size(), grid.size());
    dm.setFromTriplets(diag.begin(), diag.end());
    precond_matrix_ = p + dm;
    llt_.compute(precond_matrix_);
    have_precond_ = llt_.info() == Eigen::Success;
  }

  Vector apply(const Vector& v) const {
    const Vector& c = problem_.grid().weights();
    const Vector sv = problem_.control_to_state(v);
    return precond_matrix_ * v + problem_.control_to_state(c.cwiseProduct(sv));
  }

  Vector precondition(const Vector& r) const { return have_precond_ ? Vector(llt_.solve(r)) : r; }

  // Preconditioned CG on the SPD system.
  Vector solve(const Vector& b, const Vector& x0, int& iterations) const {
    const double bnorm = b.norm();
    Vector x = x0;
    if (bnorm == 0.0) {
      iterations = 0;
      return Vector::Zero(b.size());
    }
    Vector r = b - apply(x);
    Vector z = precondition(r);
    Vector p = z;
    double rz = r.dot(z);
    double rel = r.norm() / bnorm;
    int it = 0;
    const int max_iter = 1000;
    while (rel > 1e-12 && it < max_iter) {
      ++it;
      const Vector q = apply(p);
      const double a = rz / p.dot(q);
      x += a * p;
      r -= a * q;
      rel = r.norm() / bnorm;
      z = precondition(r);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    iterations = it;
    if (!(rel <= 1e-9)) throw SolverError("pd_solve: PCG did not converge", rel);
    return x;
  }

 private:
  const ControlProblem& problem_;
  Vector diag_;
  SpMat precond_matrix_;
  Eigen::SimplicialLLT<SpMat> llt_;
  bool have_precond_ = false;
};

// W times -S*(S f - s y_d), i.e. -A^{-1} W (S f - s y_d).
Vector reweighted_rhs(const ControlProblem& problem, double s) {
  const Vector& c = problem.grid().weights();
  const Field r = problem.control_to_state(problem.f()) - s * problem.y_d();
  return -problem.control_to_state(c.cwiseProduct(r));
}

}  // namespace

Vector pd_reweighting(const Field& u, const PDParams& pd) {
  const double expo = 2.0 - 1.0 / pd.p;
  const double floor = std::pow(pd.epsilon, expo);
  return u.unaryExpr([&](double v) { return (pd.beta / pd.p) / std::max(floor, std::pow(std::abs(v), expo)); });
}

SolveReport pd_solve(const ControlProblem& problem, const PDParams& pd, const Field& u0) {
  using clock = std::chrono::steady_clock;
  const Grid& grid = problem.grid();
  require_on_grid(grid, u0, "pd_solve u0");
  if (!(pd.epsilon > 0.0)) throw std::invalid_argument("pd_solve: epsilon must be > 0");
  if (!(pd.p > 1.0)) throw std::invalid_argument("pd_solve: p must be > 1");
  if (!(pd.beta >= 0.0)) throw std::invalid_argument("pd_solve: beta must be >= 0");
  if (pd.max_iter < 1) throw std::invalid_argument("pd_solve: max_iter must be >= 1");

  const ControlProblem costing = problem.with_params(problem.params().with_p(pd.p).with_beta(pd.beta));
  const Vector b = reweighted_rhs(problem, pd.sign == Row2Sign::adjoint_consistent ? 1.0 : -1.0);

  SolveReport rep;
  rep.u = u0;
  rep.initial_cost = cost_J(costing, rep.u).total;
  rep.stop_reason = "max_iter";
  for (int k = 1; k <= pd.max_iter; ++k) {
    const auto start = clock::now();
    const ReweightedSystem sys(problem, pd_reweighting(rep.u, pd));
    int pcg_iterations = 0;
    Field u_next = sys.solve(b, rep.u, pcg_iterations);
    if (!u_next.allFinite()) throw SolverError("pd_solve: non-finite iterate", 0.0);

    const double step = norm_l2(grid, u_next - rep.u);
    const double base = norm_l2(grid, rep.u);
    const double rel = base > 0.0 ? step / base : (step > 0.0 ? 1.0 : 0.0);
    rep.u = std::move(u_next);

    IterationRecord rec;
    rec.k = k;
    rec.cost = cost_J(costing, rep.u).total;
    rec.residual = rel;
    rec.null_entries = sparsity_count(rep.u);
    rec.inner_iterations = pcg_iterations;
    rec.elapsed_seconds = std::chrono::duration<double>(clock::now() - start).count();
    rep.iterations.push_back(rec);
    rep.residual = rel;
    if (!pd.fixed_iterations && rel <= pd.rel_tol) {
      rep.converged = true;
      rep.stop_reason = "stationary";
      break;
    }
  }
  if (pd.fixed_iterations) {
    rep.converged = rep.residual <= pd.rel_tol;
    rep.stop_reason = "fixed_iterations";
  }
  rep.y = solve_state(problem, rep.u);
  rep.phi = solve_adjoint(problem, rep.y);
  rep.cost = cost_J(costing, rep.u);
  rep.zeta = Field::Zero(grid.size());
  rep.w = Field::Zero(grid.size());
  return rep;
}

Field solve_unpenalized(const ControlProblem& problem) {
  const Grid& grid = problem.grid();
  const ReweightedSystem sys(problem, Vector::Zero(grid.size()));
  int iterations = 0;
  return sys.solve(reweighted_rhs(problem, 1.0), Vector::Zero(grid.size()), iterations);
}

namespace {

constexpr double kSampleStep = 0.005;
constexpr int kSamples = 200;

double sampled_sup(const std::function<double(double)>& err) {
  double worst = 0.0;
  for (int i = 0; i <= kSamples; ++i) worst = std::max(worst, std::abs(err(i * kSampleStep)));
  return worst;
}

// Monotone decreasing error in the parameter; bisection in log space.
double invert_decreasing(const std::function<double(double)>& err, double target) {
  double lo = std::log(1e-12), hi = std::log(1e16);
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (err(std::exp(mid)) > target) lo = mid;
    else hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

}  // namespace

double huber_regularization_error(double p, double gamma, RegularizationMeasure m) {
  if (!(p >= 1.0) || !(gamma > 0.0)) throw std::invalid_argument("huber_regularization_error: bad arguments");
  if (m == RegularizationMeasure::exact_sup) return (1.0 - 1.0 / p) * std::pow(p * gamma, -1.0 / p);
  const PenaltyParams pp(p, gamma, 0.0, 0.0);
  return sampled_sup([&](double t) { return std::pow(t, 1.0 / p) - huber_root(t, pp); });
}

double pd_regularization_error(double p, double epsilon, RegularizationMeasure m) {
  if (!(p > 1.0) || !(epsilon > 0.0)) throw std::invalid_argument("pd_regularization_error: bad arguments");
  const double lift = (1.0 - 1.0 / (2.0 * p)) * std::pow(epsilon, 1.0 / p);
  if (m == RegularizationMeasure::exact_sup) return lift;
  const double curvature = 1.0 / (2.0 * p * std::pow(epsilon, 2.0 - 1.0 / p));
  return sampled_sup([&](double t) {
    const double smoothed = t < epsilon ? curvature * t * t + lift : std::pow(t, 1.0 / p);
    return smoothed - std::pow(t, 1.0 / p);
  });
}

MatchedRegularization match_regularization(double p, double target_re, RegularizationMeasure m) {
  if (!(target_re > 0.0)) throw std::invalid_argument("match_regularization: target must be > 0");
  if (!(p > 1.0)) throw std::invalid_argument("match_regularization: p must be > 1");
  MatchedRegularization out;
  out.gamma = invert_decreasing([&](double g) { return huber_regularization_error(p, g, m); }, target_re);
  // Error grows with epsilon; invert through 1/epsilon.
  out.epsilon = 1.0 / invert_decreasing([&](double ie) { return pd_regularization_error(p, 1.0 / ie, m); },
                                        target_re);
  return out;
}

}  // namespace sparseoc
