#include <gtest/gtest.h>

#include <cmath>

#include "flashopt/composer/builtin_vectors.hpp"
#include "flashopt/opt/finite_diff.hpp"
#include "flashopt/opt/grid_oracle.hpp"
#include "flashopt/opt/qp.hpp"
#include "flashopt/opt/solver.hpp"

using namespace flashopt;
using namespace flashopt::opt;

namespace {

// maximize x + y on the unit disc, box [-2, 2]^2. Optimum (1/sqrt2, 1/sqrt2).
Problem disc_problem() {
  Problem p;
  p.n = 2;
  p.m = 1;
  p.lower = Vector::Constant(2, -2.0);
  p.upper = Vector::Constant(2, 2.0);
  p.scales = Vector::Ones(1);
  p.constraint_names = {"disc"};
  p.evaluate = [](const Vector& x, ProblemValue& out) {
    out.objective = x(0) + x(1);
    out.constraints.resize(1);
    out.constraints(0) = 1.0 - x.squaredNorm();
  };
  return p;
}

// maximize -(x-3)^2 - (y+1)^2 + z, z <= 0.5 by bound, no general constraints.
Problem bowl_problem() {
  Problem p;
  p.n = 3;
  p.m = 0;
  p.lower = Vector::Constant(3, -5.0);
  p.upper = Vector::Constant(3, 5.0);
  p.upper(2) = 0.5;
  p.scales = Vector(0);
  p.evaluate = [](const Vector& x, ProblemValue& out) {
    out.objective = -std::pow(x(0) - 3, 2) - std::pow(x(1) + 1, 2) + x(2);
    out.constraints.resize(0);
  };
  return p;
}

}  // namespace

TEST(Qp, UnconstrainedMinimum) {
  Matrix G(2, 2);
  G << 2, 0, 0, 4;
  Vector a(2);
  a << -2, -8;
  const auto r = solve_qp<double>(G, a, Matrix(0, 2), Vector(0));
  ASSERT_EQ(r.status, QpStatus::optimal);
  EXPECT_NEAR(r.x(0), 1.0, 1e-12);
  EXPECT_NEAR(r.x(1), 2.0, 1e-12);
}

TEST(Qp, ActiveConstraintAndMultiplier) {
  // min x^2 + y^2 s.t. x + y >= 2 -> (1,1), lambda = 2
  const Matrix G = 2.0 * Matrix::Identity(2, 2);
  const Vector a = Vector::Zero(2);
  Matrix C(1, 2);
  C << 1, 1;
  Vector b(1);
  b << 2;
  const auto r = solve_qp<double>(G, a, C, b);
  ASSERT_EQ(r.status, QpStatus::optimal);
  EXPECT_NEAR(r.x(0), 1.0, 1e-12);
  EXPECT_NEAR(r.x(1), 1.0, 1e-12);
  EXPECT_NEAR(r.multipliers(0), 2.0, 1e-10);
  ASSERT_EQ(r.active.size(), 1u);
}

TEST(Qp, DetectsInfeasibility) {
  const Matrix G = Matrix::Identity(1, 1);
  Matrix C(2, 1);
  C << 1, -1;
  Vector b(2);
  b << 1, 0;  // x >= 1 and x <= 0
  EXPECT_EQ(solve_qp<double>(G, Vector::Zero(1), C, b).status, QpStatus::infeasible);
}

TEST(Qp, InactiveConstraintsIgnored) {
  const Matrix G = Matrix::Identity(2, 2);
  Vector a(2);
  a << -1, -1;
  Matrix C(2, 2);
  C << 1, 0, 0, 1;
  Vector b(2);
  b << -10, -10;
  const auto r = solve_qp<double>(G, a, C, b);
  EXPECT_NEAR(r.x(0), 1.0, 1e-12);
  EXPECT_TRUE(r.active.empty());
}

TEST(FiniteDiff, LinearGradientIsExact) {
  const Vector c = (Vector(3) << 1.5, -2.0, 0.25).finished();
  const auto f = [&](const Vector& x) { return c.dot(x) + 7.0; };
  const Vector g = central_gradient<double>(f, Vector::Constant(3, 0.3), Vector::Constant(3, 1e-3));
  EXPECT_LT((g - c).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(FiniteDiff, RichardsonRatio) {
  // error of a central difference is f'''h^2/6 + ...: halving h divides it by 4
  const auto f = [](const Vector& x) { return std::exp(x(0)); };
  const Vector x = Vector::Constant(1, 0.7);
  auto g = [&](double h) { return central_gradient<double>(f, x, Vector::Constant(1, h))(0); };
  const double d1 = g(0.1) - g(0.05), d2 = g(0.05) - g(0.025);
  EXPECT_NEAR(d1 / d2, 4.0, 0.05);
}

TEST(FiniteDiff, BoundedJacobianOneSided) {
  const auto f = [](const Vector& x) { return (Vector(1) << x(0) * x(0)).finished(); };
  const Vector x = Vector::Zero(1);
  const Matrix j = bounded_jacobian<double>(f, x, f(x), Vector::Zero(1), Vector::Ones(1),
                                            Vector::Constant(1, 1e-4));
  EXPECT_NEAR(j(0, 0), 1e-4, 1e-12);
}

TEST(Solver, DiscOptimumSqp) {
  SolverConfig c;
  const auto r = solve_problem(disc_problem(), c);
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.best_params(0), std::sqrt(0.5), 1e-5);
  EXPECT_NEAR(r.best_params(1), std::sqrt(0.5), 1e-5);
  EXPECT_NEAR(r.best_objective, std::sqrt(2.0), 1e-6);
  EXPECT_EQ(r.active.size(), 1u);
}

TEST(Solver, DiscOptimumAuglag) {
  SolverConfig c;
  c.method = Method::auglag;
  const auto r = solve_problem(disc_problem(), c);
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.best_objective, std::sqrt(2.0), 1e-5);
}

TEST(Solver, BoundActiveBowl) {
  for (auto m : {Method::sqp, Method::auglag}) {
    SolverConfig c;
    c.method = m;
    const auto r = solve_problem(bowl_problem(), c);
    EXPECT_NEAR(r.best_params(0), 3.0, 1e-4);
    EXPECT_NEAR(r.best_params(1), -1.0, 1e-4);
    EXPECT_NEAR(r.best_params(2), 0.5, 1e-6);
  }
}

TEST(Solver, SeedDeterminismAndThreads) {
  const auto sc = models::bundled_scenario("oracle");
  const auto v = composer::build_oracle_vector(sc);
  SolverConfig c;
  c.seed = 9;
  const auto a = solve(v, sc.state, c);
  const auto b = solve(v, sc.state, c);
  c.threads = 3;
  const auto t = solve(v, sc.state, c);
  EXPECT_EQ(a.best_params, b.best_params);
  EXPECT_EQ(a.best_params, t.best_params);
  EXPECT_EQ(a.best_objective, t.best_objective);
}

TEST(Solver, ReportedObjectiveMatchesFreshEvaluation) {
  for (const char* name : {"paa", "oracle"}) {
    const auto sc = models::bundled_scenario(name);
    const auto v = composer::build_builtin_vector(name, sc);
    const auto r = solve(v, sc.state, SolverConfig{});
    const double fresh = composer::evaluate(v, sc.state, r.best_params).objective;
    EXPECT_LE(std::abs(fresh - r.best_objective), 1e-9 * std::abs(fresh)) << name;
    ASSERT_TRUE(r.feasible);
    for (Eigen::Index k = 0; k < r.constraints.size(); ++k) {
      EXPECT_GE(r.constraints(k) / r.scales(k), -1e-6) << r.constraint_names[k];
    }
  }
}

TEST(Solver, ConfigValidation) {
  SolverConfig c;
  c.starts = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SolverConfig{};
  c.tolerance = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(method_from_name("newton"), ConfigError);
}

TEST(Solver, LatinHypercubeStrata) {
  Rng rng(5);
  const auto pts = latin_hypercube(3, 16, rng);
  ASSERT_EQ(pts.size(), 16u);
  for (int d = 0; d < 3; ++d) {
    std::vector<int> hit(16, 0);
    for (const auto& p : pts) ++hit[static_cast<std::size_t>(std::floor(p(d) * 16))];
    for (int h : hit) EXPECT_EQ(h, 1);
  }
}

TEST(Grid, FindsDiscOptimum) {
  GridConfig g;
  g.resolution = 41;
  const auto r = grid_oracle_problem(disc_problem(), g);
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.best_objective, std::sqrt(2.0), 5e-3);
  EXPECT_LE(r.best_params.squaredNorm(), 1.0 + 1e-12);
}

TEST(Grid, RejectsHighDimensions) {
  Problem p = bowl_problem();
  p.n = 4;
  p.lower = Vector::Zero(4);
  p.upper = Vector::Ones(4);
  EXPECT_THROW(grid_oracle_problem(p, GridConfig{}), UsageError);
}

TEST(Gradient, InactiveSubspaceAtReportedPaaOptimum) {
  // only wX is active there; along it the projected gradient must be small
  const auto sc = models::bundled_scenario("paa");
  const auto v = composer::build_paa_vector(sc);
  Vector x(2);
  x << 2470.08, 1456.23;
  const Vector g = finite_diff_gradient(v, sc.state, x, 1e-2);
  const double f = composer::evaluate(v, sc.state, x).objective;
  // wX residual depends on p2 alone, so the free direction is p1
  EXPECT_LT(std::abs(g(0)), 1e-2 * std::abs(f));
}
