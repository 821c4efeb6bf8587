#include "sparseoc/penalty.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace sparseoc;

namespace {

Field random_field(Index n, std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Field f(n);
  for (Index k = 0; k < n; ++k) f[k] = nd(rng);
  return f;
}

ControlProblem small_problem(int n, PenaltyParams pp, double kappa = 0.0) {
  auto g = std::make_shared<const Grid>(n);
  const Field yd = g->sample([](double x, double y) { return std::sin(3 * x) + y; });
  const Field f = g->sample([](double x, double) { return 0.5 * x; });
  return ControlProblem(g, {}, yd, f, pp, std::nullopt, SolverKind::cholesky, kappa);
}

}  // namespace

TEST(PenaltyParams, DerivedQuantities) {
  const PenaltyParams pp(2.0, 10.0, 0.1, 0.2);
  EXPECT_DOUBLE_EQ(pp.delta(), std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(pp.junction(), 0.1);
  EXPECT_DOUBLE_EQ(pp.offset(), -0.05);
  EXPECT_DOUBLE_EQ(pp.l1_weight(), 0.2 * std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(PenaltyParams(1.0, 50.0, 0, 1).delta(), 1.0);
}

TEST(PenaltyParams, Validation) {
  EXPECT_THROW(PenaltyParams(0.5, 10, 0, 0), std::invalid_argument);
  EXPECT_THROW(PenaltyParams(2, 0, 0, 0), std::invalid_argument);
  EXPECT_THROW(PenaltyParams(2, 10, -1, 0), std::invalid_argument);
  EXPECT_THROW(PenaltyParams(2, 10, 0, -1e-9), std::invalid_argument);
  EXPECT_THROW(PenaltyParams(std::nan(""), 10, 0, 0), std::invalid_argument);
}

TEST(Huber, ReferenceValues) {
  const PenaltyParams pp(2.0, 10.0, 0, 0);
  EXPECT_DOUBLE_EQ(huber(0.1, pp), 0.05);
  EXPECT_DOUBLE_EQ(huber(-0.1, pp), 0.05);
  EXPECT_DOUBLE_EQ(huber(1.0, pp), 0.95);
  EXPECT_EQ(huber(0.0, pp), 0.0);
}

TEST(Huber, ContinuousAtJunction) {
  for (double p : {1.5, 2.0, 3.0, 7.0}) {
    for (double gamma : {1.0, 100.0, 1e4}) {
      const PenaltyParams pp(p, gamma, 0, 0);
      const double r = pp.junction();
      EXPECT_NEAR(huber(r * (1 - 1e-12), pp), huber(r * (1 + 1e-12), pp), 1e-10 * r);
      // Derivatives match too: both equal 1 at the junction.
      const double e = 1e-7 * r;
      EXPECT_NEAR((huber(r, pp) - huber(r - e, pp)) / e, 1.0, 1e-5);
      EXPECT_NEAR((huber(r + e, pp) - huber(r, pp)) / e, 1.0, 1e-5);
    }
  }
}

TEST(Huber, BelowAbsoluteValue) {
  for (double p : {1.0, 2.0, 4.0}) {
    const PenaltyParams pp(p, 30.0, 0, 0);
    for (double t = -2.0; t <= 2.0; t += 0.001) {
      EXPECT_LE(huber(t, pp), std::abs(t) + 1e-15);
      EXPECT_GE(huber(t, pp), 0.0);
    }
  }
}

TEST(Huber, RegularizedRootConvergesToQuasinorm) {
  const double t = 0.37;
  double prev = 1.0;
  for (double gamma : {10.0, 100.0, 1000.0, 10000.0}) {
    const PenaltyParams pp(2.0, gamma, 0, 0);
    const double err = std::abs(std::sqrt(t) - huber_root(t, pp));
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(JFunction, ReferenceValues) {
  const PenaltyParams a(2.0, 10.0, 0, 0);
  EXPECT_NEAR(j_value(1.0, a), 1.2613885430188933057, 1e-14);
  EXPECT_NEAR(j_prime(1.0, a), 1.7230788014572126487, 1e-14);
  EXPECT_NEAR(j_value(-1.0, a), 1.2613885430188933057, 1e-14);
  EXPECT_NEAR(j_prime(-1.0, a), -1.7230788014572126487, 1e-14);

  const PenaltyParams b(4.0, 100.0, 0, 0);
  EXPECT_NEAR(j_value(0.3, b), 5.9727906532341668118, 1e-13);
  EXPECT_NEAR(j_prime(0.3, b), 21.732121416651570231, 1e-13);
}

TEST(JFunction, IdentityWithHuberRoot) {
  const PenaltyParams pp(3.0, 40.0, 0, 0);
  for (double t = -1.0; t <= 1.0; t += 0.0137) {
    EXPECT_NEAR(j_value(t, pp), pp.delta() * std::abs(t) - huber_root(t, pp), 1e-13);
  }
}

TEST(JFunction, VanishesInsideJunction) {
  const PenaltyParams pp(2.0, 10.0, 0, 0);
  for (double t : {0.0, 0.05, -0.1, 0.1}) {
    EXPECT_EQ(j_value(t, pp), 0.0);
    EXPECT_EQ(j_prime(t, pp), 0.0);
  }
}

TEST(JFunction, DegenerateForPEqualOne) {
  const PenaltyParams pp(1.0, 10.0, 0, 0);
  for (double t : {-3.0, 0.2, 5.0}) {
    EXPECT_EQ(j_value(t, pp), 0.0);
    EXPECT_EQ(j_prime(t, pp), 0.0);
  }
}

TEST(JFunction, DerivativeMatchesFiniteDifference) {
  for (double p : {1.5, 2.0, 4.0}) {
    const PenaltyParams pp(p, 25.0, 0, 0);
    for (double t : {-0.9, -0.2, 0.041, 0.3, 2.0}) {
      const double e = 1e-6;
      const double fd = (j_value(t + e, pp) - j_value(t - e, pp)) / (2 * e);
      EXPECT_NEAR(j_prime(t, pp), fd, 1e-6 * (1 + std::abs(fd)));
    }
  }
}

TEST(JFunction, ConvexAndDerivativeBounded) {
  for (double p : {2.0, 5.0}) {
    const PenaltyParams pp(p, 50.0, 0, 0);
    double prev = -1e300;
    for (double t = -3.0; t <= 3.0; t += 0.0011) {
      const double d = j_prime(t, pp);
      EXPECT_GE(d, prev - 1e-13);
      EXPECT_LE(std::abs(d), pp.delta() + 1e-14);
      prev = d;
    }
  }
}

TEST(Integrals, UpsilonValues) {
  Grid g(3);
  const PenaltyParams pp(2.0, 10.0, 0, 0);
  const Field four = g.constant(4.0);
  EXPECT_DOUBLE_EQ(upsilon_p(g, four, pp), 2.0 * 0.25);
  EXPECT_EQ(upsilon_p(g, g.zeros(), pp), 0.0);
  EXPECT_NEAR(upsilon_pg(g, g.constant(1.0), pp), std::sqrt(0.95) * 0.25, 1e-15);
}

TEST(Integrals, RegularizedBelowExact) {
  std::mt19937 rng(11);
  Grid g(10);
  for (double gamma : {3.0, 30.0, 300.0}) {
    const PenaltyParams pp(2.0, gamma, 0, 0);
    const Field u = random_field(g.size(), rng, 0.1);
    const double exact = upsilon_p(g, u, pp);
    const double reg = upsilon_pg(g, u, pp);
    EXPECT_LE(reg, exact + 1e-15);
    // Pointwise gap is at most (1 - 1/p)(p gamma)^{-1/p}.
    EXPECT_LE(exact - reg, 0.5 * std::pow(2 * gamma, -0.5) * g.measure() + 1e-14);
  }
}

TEST(Integrals, WFieldEntrywise) {
  const PenaltyParams pp(2.0, 10.0, 0, 0);
  Field u(3);
  u << -1.0, 0.05, 1.0;
  const Field w = w_field(u, pp);
  EXPECT_NEAR(w[0], -1.7230788014572126487, 1e-14);
  EXPECT_EQ(w[1], 0.0);
  EXPECT_NEAR(w[2], 1.7230788014572126487, 1e-14);
}

TEST(SmoothCost, GradientMatchesFiniteDifference) {
  std::mt19937 rng(12);
  for (double kappa : {0.0, 0.01}) {
    const ControlProblem pb = small_problem(6, PenaltyParams(2.0, 10.0, 0.3, 0.0), kappa);
    const Grid& g = pb.grid();
    const Field u = random_field(g.size(), rng);
    const Field v = random_field(g.size(), rng);
    const SmoothCost c = cost_smooth(pb, u, solve_state(pb, u));
    const double e = 1e-6;
    const double fp = cost_smooth(pb, u + e * v, solve_state(pb, u + e * v)).value;
    const double fm = cost_smooth(pb, u - e * v, solve_state(pb, u - e * v)).value;
    const double fd = (fp - fm) / (2 * e);
    EXPECT_NEAR(inner(g, c.gradient, v), fd, 1e-7 * (1 + std::abs(fd)));
  }
}

TEST(SmoothCost, ComponentsSumAndMatchBreakdown) {
  const ControlProblem pb = small_problem(5, PenaltyParams(2.0, 10.0, 0.25, 0.1), 0.02);
  const Field u = pb.grid().constant(0.3);
  const SmoothCost c = cost_smooth(pb, u, solve_state(pb, u));
  EXPECT_DOUBLE_EQ(c.value, c.tracking + c.tikhonov + c.control_gradient);
  EXPECT_NEAR(c.tikhonov, 0.5 * 0.25 * 0.09 * pb.grid().measure(), 1e-15);
  const CostBreakdown j = cost_J(pb, u);
  EXPECT_NEAR(j.tracking, c.tracking, 1e-15);
  EXPECT_NEAR(j.control_gradient, c.control_gradient, 1e-15);
  EXPECT_NEAR(j.sparsity, 0.1 * std::sqrt(0.3) * pb.grid().measure(), 1e-15);
  EXPECT_DOUBLE_EQ(j.total, j.tracking + j.tikhonov + j.control_gradient + j.sparsity);
}

TEST(DcSplitting, DifferenceIsRegularizedCost) {
  std::mt19937 rng(13);
  for (double p : {1.0, 2.0, 3.5}) {
    const ControlProblem pb = small_problem(7, PenaltyParams(p, 20.0, 0.1, 0.05));
    for (int t = 0; t < 5; ++t) {
      const Field u = random_field(pb.grid().size(), rng, 0.2);
      const double lhs = dc_G(pb, u) - dc_H(pb, u);
      const double rhs = cost_Jgamma(pb, u).total;
      EXPECT_NEAR(lhs, rhs, 1e-13 * (1 + std::abs(rhs)));
    }
  }
}

TEST(DcSplitting, BothPartsConvex) {
  std::mt19937 rng(14);
  const ControlProblem pb = small_problem(5, PenaltyParams(2.0, 15.0, 0.0, 0.2));
  for (int t = 0; t < 50; ++t) {
    const Field a = random_field(pb.grid().size(), rng, 0.5);
    const Field b = random_field(pb.grid().size(), rng, 0.5);
    for (double s : {0.25, 0.5, 0.8}) {
      const Field m = s * a + (1 - s) * b;
      EXPECT_LE(dc_G(pb, m), s * dc_G(pb, a) + (1 - s) * dc_G(pb, b) + 1e-13);
      EXPECT_LE(dc_H(pb, m), s * dc_H(pb, a) + (1 - s) * dc_H(pb, b) + 1e-13);
    }
  }
}

TEST(DcSplitting, ConcavePartMajorizedByLinearization) {
  std::mt19937 rng(15);
  const ControlProblem pb = small_problem(5, PenaltyParams(2.0, 15.0, 0.0, 0.2));
  const Grid& g = pb.grid();
  for (int t = 0; t < 20; ++t) {
    const Field u = random_field(g.size(), rng, 0.5);
    const Field v = random_field(g.size(), rng, 0.5);
    const Field w = w_field(u, pb.params());
    EXPECT_GE(dc_H(pb, v), dc_H(pb, u) + pb.params().beta() * inner(g, w, v - u) - 1e-13);
  }
}

TEST(Integrals, ProvenGapBound) {
  std::mt19937 rng(16);
  Grid g(6);
  for (double p : {2.0, 4.0}) {
    for (double gamma : {10.0, 1000.0}) {
      const PenaltyParams pp(p, gamma, 0, 0);
      const double bound = g.measure() * std::pow(gamma, -1.0 / p) *
                           (std::pow(p, -1.0 / p) + 1.0 + std::pow(std::abs((1.0 - p) / p), 1.0 / p));
      for (int t = 0; t < 20; ++t) {
        const Field u = random_field(g.size(), rng, t % 2 ? 1.0 / gamma : 1.0);
        EXPECT_LE(std::abs(upsilon_pg(g, u, pp) - upsilon_p(g, u, pp)), bound);
      }
    }
  }
}

TEST(Integrals, WFieldBounds) {
  std::mt19937 rng(17);
  const PenaltyParams pp(3.0, 20.0, 0, 0);
  EXPECT_EQ(w_field(Field::Zero(10), pp).cwiseAbs().maxCoeff(), 0.0);
  const Field u = random_field(500, rng, 1.0);
  const Field w = w_field(u, pp);
  for (Index k = 0; k < u.size(); ++k) {
    EXPECT_EQ(w[k], j_prime(u[k], pp));
    if (std::abs(u[k]) > pp.junction()) {
      EXPECT_GT(std::abs(w[k]), 0.0);
      EXPECT_LT(std::abs(w[k]), pp.delta());
      EXPECT_EQ(sign(w[k]), sign(u[k]));
    }
  }
}

TEST(SmoothCost, TrivialStates) {
  auto g = std::make_shared<const Grid>(5);
  const Field f = g->sample([](double x, double y) { return x + y; });
  const ControlProblem pb(g, {}, g->zeros(), f, PenaltyParams(2.0, 10.0, 0.3, 0.1));
  const Field u = -f;
  const SmoothCost c = cost_smooth(pb, u, solve_state(pb, u));
  EXPECT_EQ(c.tracking, 0.0);
  EXPECT_NEAR(c.value, 0.15 * norm_l2_sq(*g, u), 1e-15);
  EXPECT_LT((c.gradient - 0.3 * u).cwiseAbs().maxCoeff(), 1e-15);

  const Field yd = g->sample([](double x, double y) { return x * y; });
  const ControlProblem flat(g, {}, yd, g->zeros(), PenaltyParams(2.0, 10.0, 0.0, 0.1));
  const Field uu = g->constant(0.7);
  EXPECT_EQ(cost_smooth(flat, uu, yd).gradient.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SmoothCost, ZeroControlAndOrdering) {
  std::mt19937 rng(18);
  const ControlProblem pb = small_problem(6, PenaltyParams(2.0, 30.0, 0.1, 0.05));
  const Grid& g = pb.grid();
  const Field z = g.zeros();
  const double j0 = 0.5 * norm_l2_sq(g, pb.control_to_state(pb.f()) - pb.y_d());
  EXPECT_NEAR(cost_J(pb, z).total, j0, 1e-15);
  EXPECT_EQ(dc_H(pb, z), 0.0);
  EXPECT_NEAR(dc_G(pb, z), j0, 1e-15);
  for (int t = 0; t < 20; ++t) {
    const Field u = random_field(g.size(), rng, t % 2 ? 0.02 : 1.0);
    EXPECT_LE(cost_Jgamma(pb, u).total, cost_J(pb, u).total + 1e-15);
    EXPECT_GE(dc_H(pb, u), 0.0);
  }
}
