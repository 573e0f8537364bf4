#include <gtest/gtest.h>

#include <random>

#include "instances.hpp"
#include "ree/diagnostics.hpp"
#include "ree/oracles.hpp"
#include "ree/solvers.hpp"

namespace ree {
namespace {

using testing::gaussian_ls;
using testing::linear_problem;
using testing::ls_problem;

Matrix frozen_x() {
  Matrix x(6, 3);
  x << 1.0, 0.5, -0.3, 0.2, -1.0, 0.8, -0.7, 0.3, 1.1, 0.9, 0.9, 0.1, -0.4, -0.6, -1.2, 0.3, 1.4, 0.5;
  return x;
}

Vector frozen_y() { return (Vector(6) << 1.2, -0.8, 0.5, 2.0, -1.5, 1.1).finished(); }

EstimatingProblem frozen_lasso(double lambda) {
  return ls_problem({frozen_x(), frozen_y(), Vector::Zero(3)}, PenaltySpec::lasso(), lambda);
}

// Coordinate descent (sklearn, alpha = lambda / n) on the frozen instance.
const std::vector<std::pair<double, Vector>>& frozen_solutions() {
  static const std::vector<std::pair<double, Vector>> table = {
      {0.4, (Vector(3) << 0.6231217281322429, 0.9343740556213836, 0.2710989612203557).finished()},
      {1.5, (Vector(3) << 0.20669969487187878, 0.8875947373601496, 0.0).finished()},
      {3.0, (Vector(3) << 0.0, 0.6241610738255033, 0.0).finished()},
  };
  return table;
}

SolverConfig tight(double tol = 1e-10) {
  SolverConfig c;
  c.tol = tol;
  c.max_iter = 200000;
  return c;
}

double max_abs(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

TEST(Picard, AffineContraction) {
  Matrix a = Matrix::Identity(2, 2);
  auto problem = linear_problem(a, (Vector(2) << 1, 2).finished(), PenaltySpec::ridge(), 0.0);
  SolverConfig config = tight(1e-12);
  config.tau = 0.5;
  const auto report = solve_picard(problem, config, CoefficientVector::zeros(2));
  EXPECT_EQ(report.status, SolverStatus::Converged);
  EXPECT_LE(max_abs(report.solution.values() - (Vector(2) << 1, 2).finished()), 1e-11);
}

TEST(Picard, FixedPointInitReturnsImmediately) {
  auto problem = frozen_lasso(5.79 * 1.01);
  const auto report = solve_picard(problem, tight(), CoefficientVector::zeros(3));
  EXPECT_EQ(report.status, SolverStatus::Converged);
  EXPECT_EQ(report.iterations, 1);
  EXPECT_EQ(report.final_residual(), 0.0);
}

TEST(Picard, MatchesFrozenLassoSolutions) {
  for (const auto& [lambda, expected] : frozen_solutions()) {
    const auto report = solve_picard(frozen_lasso(lambda), tight(1e-12), CoefficientVector::zeros(3));
    ASSERT_EQ(report.status, SolverStatus::Converged);
    EXPECT_LE(max_abs(report.solution.values() - expected), 1e-9) << lambda;
  }
}

TEST(AllSolvers, MatchFrozenLassoSolutions) {
  for (const auto& [lambda, expected] : frozen_solutions()) {
    const auto problem = frozen_lasso(lambda);
    for (Method m : {Method::KM, Method::GraFixed, Method::GraAdaptive}) {
      const auto report = solve(problem, tight(1e-11), CoefficientVector::zeros(3), m);
      ASSERT_EQ(report.status, SolverStatus::Converged) << to_string(m);
      EXPECT_LE(max_abs(report.solution.values() - expected), 1e-8) << to_string(m) << " " << lambda;
    }
  }
}

TEST(AllSolvers, MatchFrozenGroupLasso) {
  auto problem = ls_problem({frozen_x(), frozen_y(), Vector::Zero(3)},
                            PenaltySpec::group_lasso(GroupPartition({{0, 1}, {2}})), 0.7);
  const Vector expected = (Vector(3) << 0.6338598696933919, 0.9067164063234722, 0.19600433341039958).finished();
  for (Method m : {Method::Picard, Method::KM, Method::GraFixed, Method::GraAdaptive}) {
    const auto report = solve(problem, tight(1e-11), CoefficientVector::zeros(3), m);
    ASSERT_EQ(report.status, SolverStatus::Converged) << to_string(m);
    EXPECT_LE(max_abs(report.solution.values() - expected), 1e-8) << to_string(m);
  }
}

TEST(Picard, AgreesWithCoordinateDescentOracle) {
  const auto d = gaussian_ls(20, 5, 101);
  const double lambda = 0.2 * lasso_lambda_max(LeastSquaresEstimating(d.x, d.y));
  const auto report = solve_picard(ls_problem(d, PenaltySpec::lasso(), lambda), tight(1e-12),
                                   CoefficientVector::zeros(5));
  ASSERT_TRUE(report.converged());
  EXPECT_LE(max_abs(report.solution.values() - oracle::lasso_cd(d.x, d.y, lambda, 1e-14)), 1e-6);
}

TEST(Km, RhoNearOneTracksPicard) {
  const auto problem = frozen_lasso(0.4);
  SolverConfig config = tight(1e-10);
  config.rho = 0.999;
  const auto km = solve_km(problem, config, CoefficientVector::zeros(3));
  const auto picard = solve_picard(problem, config, CoefficientVector::zeros(3));
  ASSERT_TRUE(km.converged());
  EXPECT_LE(max_abs(km.solution.values() - picard.solution.values()), 1e-8);
  EXPECT_LE(std::abs(km.iterations - picard.iterations), picard.iterations / 10 + 2);
}

TEST(Km, InvalidRho) {
  SolverConfig config;
  config.rho = 1.0;
  try {
    solve_km(frozen_lasso(1.0), config, CoefficientVector::zeros(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidRho);
  }
}

// A = (I - R) / tau with R a rotation: Picard's map is the rotation itself.
TEST(Km, ConvergesWherePicardCycles) {
  const Matrix r = testing::rotation(std::acos(-1.0) / 2);
  auto problem = linear_problem(Matrix::Identity(2, 2) - r, Vector::Zero(2), PenaltySpec::ridge(), 0.0);
  SolverConfig config;
  config.tau = 1.0;
  config.tol = 1e-9;
  config.max_iter = 10000;
  const CoefficientVector init({1.0, 0.0});
  const auto picard = solve_picard(problem, config, init);
  EXPECT_EQ(picard.status, SolverStatus::MaxIterReached);
  double min_picard = INFINITY;
  for (const auto& rec : picard.trace) min_picard = std::min(min_picard, rec.fp_residual);
  EXPECT_GE(min_picard, 1e-3);
  const auto km = solve_km(problem, config, init);
  EXPECT_EQ(km.status, SolverStatus::Converged);
  EXPECT_LE(km.solution.values().norm(), 1e-8);
}

TEST(GraFixed, NonSymmetricMonotoneOperator) {
  Matrix a(2, 2);
  a << 2, 1, -1, 2;
  auto problem = linear_problem(a, (Vector(2) << 1, 1).finished(), PenaltySpec::lasso(), 0.1);
  const auto report = solve(problem, tight(1e-10), CoefficientVector::zeros(2), Method::GraFixed);
  ASSERT_TRUE(report.converged());
  EXPECT_LE(fixed_point_residual(problem, report.solution.values(), 0.1), 1e-9);
  EXPECT_TRUE(vi_probe(problem, report.solution.values(), 2000, 1.0, 7).passed);
}

TEST(GraFixed, StepOutOfRange) {
  SolverConfig config;
  config.step = 1.0;
  try {
    solve_gra_fixed(frozen_lasso(1.0), config, 5.6, CoefficientVector::zeros(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StepOutOfRange);
  }
  auto opaque = std::make_shared<CallbackEstimating>(2, [](const Vector& b) -> Vector { return b; });
  EstimatingProblem p{opaque, PenaltySpec::lasso(), 0.1};
  try {
    solve(p, SolverConfig{}, CoefficientVector::zeros(2), Method::GraFixed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StepOutOfRange);
  }
}

TEST(GraAdaptive, NeedsNoLipschitzConstant) {
  Matrix a(2, 2);
  a << 2, 1, -1, 2;
  auto base = linear_problem(a, (Vector(2) << 1, 1).finished(), PenaltySpec::lasso(), 0.1);
  auto opaque = std::make_shared<CallbackEstimating>(
      2, [a](const Vector& b) -> Vector { return a * b - Vector::Ones(2); });
  EstimatingProblem problem{opaque, PenaltySpec::lasso(), 0.1};
  const auto report = solve_gra_adaptive(problem, tight(1e-10), CoefficientVector::zeros(2));
  ASSERT_TRUE(report.converged());
  const auto reference = solve(base, tight(1e-12), CoefficientVector::zeros(2), Method::GraFixed);
  EXPECT_LE(max_abs(report.solution.values() - reference.solution.values()), 1e-8);
  for (const auto& rec : report.trace) {
    ASSERT_TRUE(rec.theta.has_value());
    EXPECT_GT(rec.step, 0.0);
  }
}

TEST(GraAdaptive, DegenerateInit) {
  try {
    solve_gra_adaptive(frozen_lasso(1.0), SolverConfig{}, CoefficientVector::zeros(3), CoefficientVector::zeros(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateInit);
  }
}

TEST(GraAdaptive, ConstantOperatorUsesStepCap) {
  // U constant: Delta U = 0, so the step is governed by rho t_prev and t_bar.
  auto u = std::make_shared<CallbackEstimating>(2, [](const Vector&) -> Vector { return Vector::Ones(2); });
  EstimatingProblem problem{u, PenaltySpec::ball_indicator(BallConstraint::l2(1.0)), 1.0};
  SolverConfig config = tight(1e-10);
  config.t_bar = 10.0;
  const auto report = solve(problem, config, CoefficientVector::zeros(2), Method::GraAdaptive);
  ASSERT_TRUE(report.converged());
  EXPECT_LE(max_abs(report.solution.values() + Vector::Ones(2) / std::sqrt(2.0)), 1e-9);
  for (const auto& rec : report.trace) EXPECT_LE(rec.step, 10.0);
}

TEST(GraAdaptive, FixedPointInitConverges) {
  const auto report = solve_gra_adaptive(frozen_lasso(6.0), SolverConfig{}, CoefficientVector::zeros(3));
  EXPECT_EQ(report.status, SolverStatus::Converged);
  EXPECT_EQ(report.solution.values(), Vector::Zero(3));
}

TEST(Lqa, SupportStableLassoMatchesOracle) {
  const auto d = gaussian_ls(50, 5, 77);
  const double lambda = 0.1;
  auto problem = ls_problem(d, PenaltySpec::lasso(), lambda);
  const Vector start = d.x.colPivHouseholderQr().solve(d.y);
  SolverConfig config = tight(1e-9);
  config.max_iter = 500;
  const auto report = solve_lqa_newton(problem, config, CoefficientVector(start));
  ASSERT_TRUE(report.converged()) << report.message;
  EXPECT_LE(max_abs(report.solution.values() - oracle::lasso_cd(d.x, d.y, lambda, 1e-14)), 1e-5);
  ASSERT_TRUE(report.zero_threshold.has_value());
}

TEST(Lqa, ScadLeavesLargeCoefficientsUnbiased) {
  const auto d = gaussian_ls(200, 4, 5, 2, 3.0, 0.05);
  const double lambda = 0.2;
  auto problem = ls_problem(d, PenaltySpec::lasso(), lambda);
  const Vector ols = d.x.colPivHouseholderQr().solve(d.y);
  SolverConfig config = tight(1e-9);
  config.max_iter = 500;
  const auto report = solve_lqa_newton(problem, LqaScad{3.7}, config, CoefficientVector(ols));
  ASSERT_TRUE(report.converged()) << report.message;
  // Coefficients beyond a * lambda get zero penalty, so they stay at the restricted least-squares values.
  const Matrix xs = d.x.leftCols(2);
  const Vector restricted = xs.colPivHouseholderQr().solve(d.y);
  EXPECT_LE(max_abs(report.solution.values().head(2) - restricted), 1e-6);
  EXPECT_EQ(report.solution.values().tail(2), Vector::Zero(2));
}

TEST(Lqa, FlagsWideDesign) {
  const auto d = gaussian_ls(20, 200, 9);
  auto problem = ls_problem(d, PenaltySpec::lasso(), 0.5 * lasso_lambda_max(LeastSquaresEstimating(d.x, d.y)));
  SolverConfig config;
  config.max_iter = 3;
  Vector start = Vector::Constant(200, 0.1);
  const auto report = solve_lqa_newton(problem, config, CoefficientVector(start));
  ASSERT_FALSE(report.flags.empty());
  EXPECT_NE(report.flags.front().find("lqa_p_exceeds_n"), std::string::npos);
}

TEST(Lqa, JacobianUnavailableAndFallback) {
  auto u = std::make_shared<CallbackEstimating>(2, [](const Vector& b) -> Vector { return 2.0 * b - Vector::Ones(2); });
  EstimatingProblem problem{u, PenaltySpec::lasso(), 0.2};
  const CoefficientVector start({1.0, 1.0});
  try {
    solve_lqa_newton(problem, SolverConfig{}, start);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::JacobianUnavailable);
  }
  SolverConfig config = tight(1e-9);
  config.allow_fd_jacobian = true;
  config.tau = 0.5;
  const auto report = solve_lqa_newton(problem, config, start);
  ASSERT_TRUE(report.converged());
  EXPECT_LE(max_abs(report.solution.values() - Vector::Constant(2, 0.4)), 1e-7);
}

TEST(Lqa, RejectsGroupPenalty) {
  auto problem = ls_problem({frozen_x(), frozen_y(), Vector::Zero(3)},
                            PenaltySpec::group_lasso(GroupPartition({{0, 1}, {2}})), 0.7);
  try {
    solve(problem, SolverConfig{}, CoefficientVector({1, 1, 1}), Method::Lqa);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedPenalty);
  }
}

TEST(Constrained, L2BallProjection) {
  // U(b) = b - c with c outside the ball: the solution is c / ||c||.
  const Vector c = (Vector(2) << 3, 4).finished();
  auto problem = linear_problem(Matrix::Identity(2, 2), c, PenaltySpec::ball_indicator(BallConstraint::l2(1.0)), 0.0);
  for (Method m : {Method::Picard, Method::KM, Method::GraFixed, Method::GraAdaptive}) {
    const auto report = solve(problem, tight(1e-10), CoefficientVector({5.0, -5.0}), m);
    ASSERT_TRUE(report.converged()) << to_string(m);
    EXPECT_LE(max_abs(report.solution.values() - (Vector(2) << 0.6, 0.8).finished()), 1e-9) << to_string(m);
    EXPECT_TRUE(BallConstraint::l2(1.0).contains(report.solution.values(), 1e-12));
  }
  EXPECT_THROW(solve(problem, SolverConfig{}, CoefficientVector::zeros(2), Method::Lqa), Error);
  EXPECT_THROW(solve_constrained(frozen_lasso(1.0), SolverConfig{}, CoefficientVector::zeros(3), Method::Picard),
               Error);
}

TEST(Constrained, BoxAndL1) {
  const Vector c = (Vector(3) << 2, -0.2, 0.5).finished();
  auto box = linear_problem(Matrix::Identity(3, 3), c,
                            PenaltySpec::ball_indicator(BallConstraint::box(-Vector::Ones(3), Vector::Ones(3))), 0);
  const auto rb = solve(box, tight(1e-10), CoefficientVector::zeros(3), Method::GraAdaptive);
  EXPECT_LE(max_abs(rb.solution.values() - (Vector(3) << 1, -0.2, 0.5).finished()), 1e-9);
  auto l1 = linear_problem(Matrix::Identity(3, 3), c, PenaltySpec::ball_indicator(BallConstraint::l1(1.0)), 0);
  const auto rl = solve(l1, tight(1e-10), CoefficientVector::zeros(3), Method::Picard);
  EXPECT_LE(max_abs(rl.solution.values() - project_ball(BallConstraint::l1(1.0), c)), 1e-9);
}

TEST(Divergence, ExpandingOperatorIsReported) {
  // Non-monotone U(b) = -b with tau = 1 doubles the iterate each step.
  auto problem = linear_problem(-Matrix::Identity(2, 2), Vector::Zero(2), PenaltySpec::ridge(), 0.0);
  SolverConfig config;
  config.tau = 1.0;
  config.max_iter = 10000;
  const auto report = solve_picard(problem, config, CoefficientVector({1.0, 1.0}));
  EXPECT_EQ(report.status, SolverStatus::Diverged);
  EXPECT_TRUE(report.solution.values().allFinite());
  EXPECT_LT(report.iterations, 100);
}

TEST(Divergence, NonFiniteCallback) {
  auto u = std::make_shared<CallbackEstimating>(1, [](const Vector& b) -> Vector {
    return Vector::Constant(1, b[0] > 0.5 ? NAN : -1.0);
  });
  EstimatingProblem problem{u, PenaltySpec::ridge(), 0.0};
  SolverConfig config;
  config.tau = 1.0;
  const auto report = solve_picard(problem, config, CoefficientVector({0.0}));
  EXPECT_EQ(report.status, SolverStatus::Diverged);
}

TEST(Path, LambdaMaxGivesZeroAndSingleLambdaMatchesSolve) {
  const auto d = gaussian_ls(40, 10, 3);
  const auto base = ls_problem(d, PenaltySpec::lasso(), 1.0);
  const double lmax = lasso_lambda_max(*base.u);
  const auto grid = auto_lambda_grid(lmax, 5);
  EXPECT_EQ(grid.front(), lmax);
  EXPECT_NEAR(grid.back(), lmax / 100, 1e-12 * lmax);
  const auto path = solve_path(base, grid, tight(), Method::GraAdaptive, CoefficientVector::zeros(10));
  ASSERT_EQ(path.size(), 5u);
  EXPECT_TRUE(path.front().support.empty());
  EXPECT_EQ(path.front().report->solution.values(), Vector::Zero(10));

  const auto single = solve_path(base, {grid[2]}, tight(), Method::Picard, CoefficientVector::zeros(10));
  const auto direct = solve_at_lambda(base, grid[2], tight(), CoefficientVector::zeros(10), Method::Picard,
                                      std::nullopt);
  EXPECT_EQ(single.front().report->solution.values(), direct.solution.values());
  EXPECT_EQ(single.front().report->iterations, direct.iterations);
}

TEST(Path, WarmStartsSaveIterations) {
  const auto d = gaussian_ls(60, 20, 11, 5);
  const auto base = ls_problem(d, PenaltySpec::lasso(), 1.0);
  const auto grid = auto_lambda_grid(lasso_lambda_max(*base.u), 50);
  auto total = [&](bool warm) {
    PathOptions options;
    options.warm_start = warm;
    int sum = 0;
    for (const auto& e : solve_path(base, grid, tight(1e-8), Method::Picard, CoefficientVector::zeros(20), options)) {
      EXPECT_TRUE(e.report && e.report->converged());
      sum += e.report->iterations;
    }
    return sum;
  };
  EXPECT_LE(total(true), total(false));
}

TEST(Path, InvalidGrids) {
  const auto base = frozen_lasso(1.0);
  for (const std::vector<double>& bad :
       {std::vector<double>{}, std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 1.0},
        std::vector<double>{1.0, -1.0}}) {
    try {
      solve_path(base, bad, SolverConfig{}, Method::Picard, CoefficientVector::zeros(3));
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidPath);
    }
  }
  EXPECT_THROW(auto_lambda_grid(0.0, 5), Error);
}

TEST(Path, RecordsPerLambdaErrors) {
  SolverConfig config;
  config.step = 10.0;
  const auto path = solve_path(frozen_lasso(1.0), {2.0, 1.0}, config, Method::GraFixed, CoefficientVector::zeros(3));
  ASSERT_EQ(path.size(), 2u);
  for (const auto& e : path) {
    EXPECT_FALSE(e.report.has_value());
    EXPECT_NE(e.error.find("StepOutOfRange"), std::string::npos);
  }
}

TEST(Path, ParallelColdStartsMatchSerial) {
  const auto d = gaussian_ls(40, 15, 21);
  const auto base = ls_problem(d, PenaltySpec::lasso(), 1.0);
  const auto grid = auto_lambda_grid(lasso_lambda_max(*base.u), 12);
  PathOptions serial{.warm_start = false, .jobs = 1};
  PathOptions parallel{.warm_start = false, .jobs = 4};
  const auto a = solve_path(base, grid, tight(), Method::GraAdaptive, CoefficientVector::zeros(15), serial);
  const auto b = solve_path(base, grid, tight(), Method::GraAdaptive, CoefficientVector::zeros(15), parallel);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_EQ(a[i].report->solution.values(), b[i].report->solution.values());
    EXPECT_EQ(a[i].report->iterations, b[i].report->iterations);
  }
}

TEST(Reports, DeterministicAndTraceSized) {
  const auto d = gaussian_ls(30, 8, 4);
  const auto problem = ls_problem(d, PenaltySpec::elastic_net(0.3), 0.2);
  for (Method m : {Method::Picard, Method::KM, Method::GraFixed, Method::GraAdaptive}) {
    const auto r1 = solve(problem, tight(), CoefficientVector::zeros(8), m);
    const auto r2 = solve(problem, tight(), CoefficientVector::zeros(8), m);
    EXPECT_EQ(r1.solution.values(), r2.solution.values());
    EXPECT_EQ(r1.iterations, static_cast<int>(r1.trace.size()));
    EXPECT_EQ(r1.trace.back().k, r1.iterations - 1);
    EXPECT_EQ(r1.method, m);
    if (r1.converged()) {
      EXPECT_LE(r1.final_residual(), 1e-10);
      EXPECT_LE(fixed_point_residual(problem, r1.solution.values(), r1.step), 1e-10 * (1 + 1e-9));
    }
  }
}

TEST(Km, DistanceToSolutionIsNonincreasing) {
  const auto d = gaussian_ls(30, 8, 14);
  const auto problem = ls_problem(d, PenaltySpec::lasso(), 0.1);
  const auto reference = solve_picard(problem, tight(1e-13), CoefficientVector::zeros(8));
  SolverConfig config = tight(1e-10);
  config.record_iterates = true;
  const auto km = solve_km(problem, config, CoefficientVector::zeros(8));
  double previous = INFINITY;
  for (const auto& rec : km.trace) {
    const double dist = (*rec.iterate - reference.solution.values()).norm();
    EXPECT_LE(dist, previous + 1e-10);
    previous = dist;
  }
}

TEST(Solvers, DimensionMismatchedInit) {
  EXPECT_THROW(solve_picard(frozen_lasso(1.0), SolverConfig{}, CoefficientVector::zeros(2)), Error);
}

}  // namespace
}  // namespace ree
