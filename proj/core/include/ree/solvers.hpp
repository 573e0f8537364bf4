#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ree/penalties.hpp"
#include "ree/problem.hpp"
#include "ree/types.hpp"

namespace ree {

/// f(beta) = prox_{step lambda Omega}(beta - step U(beta)), given U(beta).
Vector forward_backward(const EstimatingProblem& problem, const Vector& beta, const Vector& u_beta, double step);

/// Picard iteration beta <- f(beta).
SolverReport solve_picard(const EstimatingProblem& problem, const SolverConfig& config,
                          const CoefficientVector& init);

/// Krasnosel'skii-Mann iteration beta <- (1 - rho) beta + rho f(beta).
///
/// A converged run reports f(beta^(k)) rather than beta^(k): the prox output
/// carries the exact zeros the averaged iterate only approaches.
SolverReport solve_km(const EstimatingProblem& problem, const SolverConfig& config,
                      const CoefficientVector& init);

/// Golden ratio algorithm with fixed step t in (0, phi / (2L)].
///
/// init is beta^(1); anchor is bar-beta^(0) and defaults to init.
SolverReport solve_gra_fixed(const EstimatingProblem& problem, const SolverConfig& config, double lipschitz,
                             const CoefficientVector& init,
                             const std::optional<CoefficientVector>& anchor = std::nullopt);

/// Adaptive golden ratio algorithm. Needs no Lipschitz constant.
///
/// init is beta^(0). When second is not given it is one forward-backward step
/// of size 1e-6 from init; if that step does not move, init is already a fixed
/// point and the solver returns immediately.
SolverReport solve_gra_adaptive(const EstimatingProblem& problem, const SolverConfig& config,
                                const CoefficientVector& init,
                                const std::optional<CoefficientVector>& second = std::nullopt);

/// LQA-Newton baseline for elementwise penalties.
///
/// Iterates beta <- beta - [J(beta) + Lambda(beta)]^{-1} (U(beta) + Lambda(beta) beta)
/// with Lambda_jj = p'(|beta_j|) / (|beta_j| + epsilon). Coefficients below
/// zero_threshold are reported as exact zeros; the stopping residual is the
/// fixed-point residual of that truncated iterate.
SolverReport solve_lqa_newton(const EstimatingProblem& problem, const LqaPenalty& penalty,
                              const SolverConfig& config, const CoefficientVector& init);

/// LQA-Newton using the problem's own penalty (Lasso only).
SolverReport solve_lqa_newton(const EstimatingProblem& problem, const SolverConfig& config,
                              const CoefficientVector& init);

/// Projected fixed-point / GRA solve for a BallIndicator problem.
///
/// The init is projected onto C first; lambda plays no role.
SolverReport solve_constrained(const EstimatingProblem& problem, const SolverConfig& config,
                               const CoefficientVector& init, Method method,
                               std::optional<double> lipschitz = std::nullopt);

/// Dispatches to one of the solvers. GRA-fixed takes lipschitz or
/// lipschitz_upper_bound(U) and throws StepOutOfRange when neither exists.
SolverReport solve(const EstimatingProblem& problem, const SolverConfig& config, const CoefficientVector& init,
                   Method method, std::optional<double> lipschitz = std::nullopt);

struct PathOptions {
  bool warm_start = true;
  /// Concurrent cold-start solves; ignored for warm starts or non-thread-safe U.
  int jobs = 1;
  std::optional<double> lipschitz;
};

struct PathEntry {
  double lambda = 0.0;
  std::optional<SolverReport> report;
  /// Set when the solve at this lambda threw.
  std::string error;
  std::vector<Index> support;
};

/// solve() on a copy of base with lambda replaced.
SolverReport solve_at_lambda(const EstimatingProblem& base, double lambda, const SolverConfig& config,
                             const CoefficientVector& init, Method method, std::optional<double> lipschitz);

/// Solves along a strictly decreasing lambda grid, warm-starting each solve
/// from the previous solution unless options.warm_start is false.
std::vector<PathEntry> solve_path(const EstimatingProblem& base, const std::vector<double>& lambdas,
                                  const SolverConfig& config, Method method, const CoefficientVector& init,
                                  const PathOptions& options = {});

/// Log-spaced grid of n values from lambda_max down two decades.
std::vector<double> auto_lambda_grid(double lambda_max, int n);

/// ||U(0)||_inf, the smallest lambda at which zero solves a lasso problem.
double lasso_lambda_max(const EstimatingFunction& u);

}  // namespace ree
