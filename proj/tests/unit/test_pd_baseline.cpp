#include "sparseoc/pd_baseline.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace sparseoc;

namespace {

ControlProblem comparison_problem(int n, double alpha, double kappa, QuadratureRule rule = QuadratureRule::uniform) {
  auto g = std::make_shared<const Grid>(n, rule);
  const Field yd = g->sample([](double x, double y) {
    const double c = std::cos(2.0 * std::numbers::pi * x * y);
    return std::exp(-c * c / 0.1);
  });
  return ControlProblem(g, {}, yd, g->zeros(), PenaltyParams(2.0, 1000.0, alpha, 0.0), std::nullopt,
                        SolverKind::cholesky, kappa);
}

// Dense minimizer of 1/2|Su - y_d|^2 + alpha/2|u|^2 + kappa/2 h^2 u'Eu in the weighted metric.
Field dense_lq(const ControlProblem& pb) {
  const Grid& g = pb.grid();
  const Eigen::MatrixXd s = Eigen::MatrixXd(pb.op().matrix()).inverse();
  const Eigen::MatrixXd c = g.weights().asDiagonal();
  Eigen::MatrixXd lhs = s.transpose() * c * s + pb.params().alpha() * c;
  lhs += pb.gradient_weight() * g.h() * g.h() * Eigen::MatrixXd(pb.laplacian().matrix());
  const Eigen::VectorXd rhs = s.transpose() * c * (pb.y_d() - s * pb.f());
  return lhs.ldlt().solve(rhs);
}

}  // namespace

TEST(Reweighting, FormulaAndBound) {
  PDParams pd;
  pd.epsilon = 1e-2;
  pd.p = 2.0;
  pd.beta = 0.3;
  Field u(4);
  u << 0.0, 1e-3, -0.5, 4.0;
  const Vector d = pd_reweighting(u, pd);
  const double cap = 0.15 / std::pow(1e-2, 1.5);
  EXPECT_DOUBLE_EQ(d[0], cap);
  EXPECT_DOUBLE_EQ(d[1], cap);
  EXPECT_NEAR(d[2], 0.15 / std::pow(0.5, 1.5), 1e-14);
  EXPECT_NEAR(d[3], 0.15 / 8.0, 1e-15);
  EXPECT_LE(d.maxCoeff(), cap);
}

TEST(Unpenalized, MatchesDenseSolve) {
  for (auto rule : {QuadratureRule::uniform, QuadratureRule::trapezoid}) {
    for (double kappa : {0.0, 1.0}) {
      const ControlProblem pb = comparison_problem(7, 1e-3, kappa, rule);
      const Field u = solve_unpenalized(pb);
      const Field ref = dense_lq(pb);
      EXPECT_LT((u - ref).cwiseAbs().maxCoeff(), 1e-8 * ref.cwiseAbs().maxCoeff());
    }
  }
}

TEST(PdSolve, WithoutPenaltyIsQuadraticSolution) {
  const ControlProblem pb = comparison_problem(9, 0.0, 1.0);
  PDParams pd;
  pd.beta = 0.0;
  const SolveReport rep = pd_solve(pb, pd, pb.grid().zeros());
  EXPECT_TRUE(rep.converged);
  const Field ref = dense_lq(pb);
  EXPECT_LT((rep.u - ref).cwiseAbs().maxCoeff(), 1e-8 * ref.cwiseAbs().maxCoeff());
  EXPECT_LE(rep.iterations.size(), 2u);
}

TEST(PdSolve, AsPrintedSignNegatesControl) {
  const ControlProblem pb = comparison_problem(9, 0.0, 1.0);
  PDParams pd;
  pd.beta = 5e-4;
  pd.max_iter = 15;
  pd.fixed_iterations = true;
  const Field u0 = solve_unpenalized(pb);
  const SolveReport a = pd_solve(pb, pd, u0);
  pd.sign = Row2Sign::as_printed;
  const SolveReport b = pd_solve(pb, pd, -u0);
  EXPECT_LT((a.u + b.u).cwiseAbs().maxCoeff(), 1e-10 * a.u.cwiseAbs().maxCoeff());
}

TEST(PdSolve, NoExactZerosAndConsistentState) {
  const ControlProblem pb = comparison_problem(11, 0.0, 1.0);
  PDParams pd;
  pd.beta = 5e-4;
  pd.epsilon = 1e-4;
  pd.max_iter = 30;
  const SolveReport rep = pd_solve(pb, pd, solve_unpenalized(pb));
  EXPECT_EQ(sparsity_count(rep.u), 0);
  EXPECT_LT((rep.y - solve_state(pb, rep.u)).cwiseAbs().maxCoeff(), 1e-14);
  // Recorded costs are the exact quasinorm objective.
  const ControlProblem costing = pb.with_params(pb.params().with_beta(5e-4));
  EXPECT_NEAR(rep.iterations.back().cost, cost_J(costing, rep.u).total, 1e-15);
  EXPECT_NEAR(rep.cost.total, cost_J(costing, rep.u).total, 1e-15);
  EXPECT_GT(rep.iterations.front().inner_iterations, 0);
}

TEST(PdSolve, PenaltyShrinksControl) {
  const ControlProblem pb = comparison_problem(11, 0.0, 1.0);
  const Field u0 = solve_unpenalized(pb);
  PDParams pd;
  pd.beta = 5e-4;
  pd.max_iter = 30;
  const SolveReport rep = pd_solve(pb, pd, u0);
  EXPECT_LT(norm_l1(pb.grid(), rep.u), norm_l1(pb.grid(), u0));
  EXPECT_LT(rep.cost.total, rep.initial_cost);
}

TEST(PdSolve, InputValidation) {
  const ControlProblem pb = comparison_problem(3, 0.0, 1.0);
  const Field z = pb.grid().zeros();
  PDParams pd;
  pd.epsilon = 0.0;
  EXPECT_THROW(pd_solve(pb, pd, z), std::invalid_argument);
  pd = {};
  pd.p = 1.0;
  EXPECT_THROW(pd_solve(pb, pd, z), std::invalid_argument);
  pd = {};
  pd.max_iter = 0;
  EXPECT_THROW(pd_solve(pb, pd, z), std::invalid_argument);
  EXPECT_THROW(pd_solve(pb, PDParams{}, Vector::Zero(2)), std::invalid_argument);
}

TEST(RegularizationError, ClosedForms) {
  EXPECT_NEAR(huber_regularization_error(2.0, 2222.2222222222226), 0.0075, 1e-15);
  EXPECT_NEAR(pd_regularization_error(2.0, 1e-4), 0.0075, 1e-15);
  EXPECT_NEAR(huber_regularization_error(4.0, 100.0), 0.75 * std::pow(400.0, -0.25), 1e-15);
}

TEST(RegularizationError, SampledReferenceValues) {
  const auto sampled = RegularizationMeasure::sampled;
  EXPECT_NEAR(huber_regularization_error(2.0, 500.0, sampled), 0.007465124915287169, 1e-14);
  EXPECT_NEAR(huber_regularization_error(2.0, 300.0, sampled), 0.012975651199692177, 1e-14);
  // Sampling never exceeds the exact supremum.
  for (double g : {10.0, 300.0, 5000.0}) {
    EXPECT_LE(huber_regularization_error(2.0, g, sampled), huber_regularization_error(2.0, g) + 1e-15);
  }
}

TEST(RegularizationError, Monotone) {
  double prev_h = 1e300, prev_pd = 0.0;
  for (double t = 1e-6; t < 1e3; t *= 3.0) {
    const double h = huber_regularization_error(3.0, t * 1e3);
    const double e = pd_regularization_error(3.0, t * 1e-6);
    EXPECT_GT(prev_h, h);
    EXPECT_GT(e, prev_pd);
    prev_h = h;
    prev_pd = e;
  }
}

TEST(MatchRegularization, ReferenceValues) {
  const MatchedRegularization m = match_regularization(2.0, 0.0075);
  EXPECT_NEAR(m.gamma, 2222.2222222222226, 1e-8);
  EXPECT_NEAR(m.epsilon, 1e-4, 1e-15);
  const MatchedRegularization s = match_regularization(2.0, 0.0075, RegularizationMeasure::sampled);
  EXPECT_NEAR(huber_regularization_error(2.0, s.gamma, RegularizationMeasure::sampled), 0.0075, 1e-10);
  EXPECT_THROW(match_regularization(2.0, 0.0), std::invalid_argument);
  EXPECT_THROW(match_regularization(1.0, 0.01), std::invalid_argument);
}

TEST(Names, RoundTrip) {
  EXPECT_EQ(row2_sign_from_string(to_string(Row2Sign::as_printed)), Row2Sign::as_printed);
  EXPECT_EQ(row2_sign_from_string(to_string(Row2Sign::adjoint_consistent)), Row2Sign::adjoint_consistent);
  EXPECT_EQ(measure_from_string(to_string(RegularizationMeasure::sampled)), RegularizationMeasure::sampled);
  EXPECT_THROW(row2_sign_from_string("flipped"), std::invalid_argument);
  EXPECT_THROW(measure_from_string("max"), std::invalid_argument);
}
