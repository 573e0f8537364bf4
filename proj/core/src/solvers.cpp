#include "ree/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "ree/estimating.hpp"

namespace ree {

namespace {

constexpr double kDivergenceResidual = 1e12;
constexpr double kDefaultSecondPointStep = 1e-6;

void require_init(const EstimatingProblem& problem, const CoefficientVector& init, const char* what) {
  if (init.size() != problem.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has length " + std::to_string(init.size()) +
                                                  " but p = " + std::to_string(problem.dimension()));
  }
}

double resolve_tau(const EstimatingProblem& problem, const SolverConfig& config, SolverReport& report) {
  if (config.tau) return *config.tau;
  const auto lipschitz = lipschitz_upper_bound(*problem.u);
  if (!lipschitz || !(*lipschitz > 0.0)) {
    throw Error(ErrorCode::InvalidConfig,
                "tau is required: no Lipschitz bound is available for " + problem.u->name());
  }
  report.lipschitz = *lipschitz;
  return 1.0 / *lipschitz;
}

SolverReport empty_report(const CoefficientVector& init, Method method) {
  SolverReport report{.solution = init};
  report.method = method;
  return report;
}

bool diverged(const Vector& beta, double residual) {
  return !beta.allFinite() || !std::isfinite(residual) || residual > kDivergenceResidual;
}

IterationRecord make_record(int k, double residual, double step, const SolverConfig& config, const Vector& beta) {
  IterationRecord record;
  record.k = k;
  record.fp_residual = residual;
  record.step = step;
  if (config.record_iterates) record.iterate = beta;
  return record;
}

void finish(SolverReport& report, const Vector& last_finite, SolverStatus status, std::string message = {}) {
  report.status = status;
  report.iterations = static_cast<int>(report.trace.size());
  report.solution = CoefficientVector(last_finite);
  if (!message.empty()) report.message = std::move(message);
}

// Shared driver for Picard (rho = 1) and KM: beta <- (1 - rho) beta + rho f(beta).
SolverReport run_averaged(const EstimatingProblem& problem, const SolverConfig& config,
                          const CoefficientVector& init, double rho, Method method) {
  validate_problem(problem);
  config.validate();
  require_init(problem, init, "init");
  SolverReport report = empty_report(init, method);
  const double tau = resolve_tau(problem, config, report);
  report.step = tau;

  Vector beta = init.values();
  for (int k = 0; k < config.max_iter; ++k) {
    Vector u;
    try {
      u = evaluate(*problem.u, beta);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteOutput) throw;
      finish(report, beta, SolverStatus::Diverged, e.what());
      return report;
    }
    Vector mapped = forward_backward(problem, beta, u, tau);
    const double residual = (mapped - beta).norm();
    report.trace.push_back(make_record(k, residual, tau, config, beta));
    if (diverged(mapped, residual)) {
      finish(report, beta, SolverStatus::Diverged, "non-finite or exploding fixed-point residual");
      return report;
    }
    if (residual <= config.tol) {
      // The averaged iterate never zeroes a coordinate exactly; f(beta) does, and
      // by nonexpansiveness its own residual is no larger.
      finish(report, rho == 1.0 ? beta : mapped, SolverStatus::Converged);
      return report;
    }
    if (k + 1 == config.max_iter) break;
    Vector next = rho == 1.0 ? std::move(mapped) : Vector((1.0 - rho) * beta + rho * mapped);
    if (!next.allFinite()) {
      finish(report, beta, SolverStatus::Diverged, "non-finite iterate");
      return report;
    }
    beta = std::move(next);
  }
  finish(report, beta, SolverStatus::MaxIterReached);
  return report;
}

}  // namespace

Vector forward_backward(const EstimatingProblem& problem, const Vector& beta, const Vector& u_beta, double step) {
  return prox(problem.penalty, beta - step * u_beta, step * problem.lambda).point;
}

SolverReport solve_picard(const EstimatingProblem& problem, const SolverConfig& config,
                          const CoefficientVector& init) {
  return run_averaged(problem, config, init, 1.0, Method::Picard);
}

SolverReport solve_km(const EstimatingProblem& problem, const SolverConfig& config, const CoefficientVector& init) {
  return run_averaged(problem, config, init, config.rho, Method::KM);
}

SolverReport solve_gra_fixed(const EstimatingProblem& problem, const SolverConfig& config, double lipschitz,
                             const CoefficientVector& init, const std::optional<CoefficientVector>& anchor) {
  validate_problem(problem);
  config.validate();
  require_init(problem, init, "init");
  if (anchor) require_init(problem, *anchor, "anchor");
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
    throw Error(ErrorCode::StepOutOfRange, "GRA with a fixed step needs a positive finite Lipschitz constant");
  }
  const double bound = kGoldenRatio / (2.0 * lipschitz);
  const double t = config.step.value_or(bound);
  if (!(t > 0.0) || t > bound * (1.0 + 1e-12)) {
    throw Error(ErrorCode::StepOutOfRange,
                "step " + std::to_string(t) + " is outside (0, phi/(2L)] = (0, " + std::to_string(bound) + "]");
  }

  SolverReport report = empty_report(init, Method::GraFixed);
  report.lipschitz = lipschitz;
  report.step = t;

  Vector beta = init.values();
  Vector anchor_point = anchor ? anchor->values() : init.values();
  for (int k = 0; k < config.max_iter; ++k) {
    Vector u;
    try {
      u = evaluate(*problem.u, beta);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteOutput) throw;
      finish(report, beta, SolverStatus::Diverged, e.what());
      return report;
    }
    const double residual = (forward_backward(problem, beta, u, t) - beta).norm();
    report.trace.push_back(make_record(k, residual, t, config, beta));
    if (diverged(beta, residual)) {
      finish(report, beta, SolverStatus::Diverged, "non-finite or exploding fixed-point residual");
      return report;
    }
    if (residual <= config.tol) {
      finish(report, beta, SolverStatus::Converged);
      return report;
    }
    if (k + 1 == config.max_iter) break;
    anchor_point = ((kGoldenRatio - 1.0) * beta + anchor_point) / kGoldenRatio;
    Vector next = forward_backward(problem, anchor_point, u, t);
    if (!next.allFinite()) {
      finish(report, beta, SolverStatus::Diverged, "non-finite iterate");
      return report;
    }
    beta = std::move(next);
  }
  finish(report, beta, SolverStatus::MaxIterReached);
  return report;
}

SolverReport solve_gra_adaptive(const EstimatingProblem& problem, const SolverConfig& config,
                                const CoefficientVector& init, const std::optional<CoefficientVector>& second) {
  validate_problem(problem);
  config.validate();
  require_init(problem, init, "init");
  if (second) require_init(problem, *second, "second init");

  const double psi = config.psi;
  const double rho = 1.0 / psi + 1.0 / (psi * psi);
  SolverReport report = empty_report(init, Method::GraAdaptive);

  Vector beta_prev = init.values();
  Vector u_prev = evaluate(*problem.u, beta_prev);
  Vector beta;
  if (second) {
    beta = second->values();
    if (beta == beta_prev) throw Error(ErrorCode::DegenerateInit, "beta^(0) and beta^(1) coincide");
  } else {
    beta = forward_backward(problem, beta_prev, u_prev, kDefaultSecondPointStep);
    if (!beta.allFinite()) {
      report.trace.push_back(make_record(0, INFINITY, kDefaultSecondPointStep, config, beta_prev));
      finish(report, beta_prev, SolverStatus::Diverged, "non-finite starting step");
      return report;
    }
    if (beta == beta_prev) {
      // A zero-length forward-backward step means init is already a fixed point.
      report.step = kDefaultSecondPointStep;
      report.trace.push_back(make_record(0, 0.0, kDefaultSecondPointStep, config, beta_prev));
      finish(report, beta_prev, SolverStatus::Converged);
      return report;
    }
  }

  Vector u;
  try {
    u = evaluate(*problem.u, beta);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonFiniteOutput) throw;
    finish(report, beta_prev, SolverStatus::Diverged, e.what());
    return report;
  }
  const double du0 = (u - u_prev).norm();
  double t_prev = du0 > 0.0 ? (beta - beta_prev).norm() / du0 : config.t_bar;
  double theta_prev = 1.0;
  Vector anchor_point = beta;

  for (int k = 0; k < config.max_iter; ++k) {
    const double dbeta_sq = (beta - beta_prev).squaredNorm();
    const double du_sq = (u - u_prev).squaredNorm();
    double t = rho * t_prev;
    if (du_sq > 0.0) t = std::min(t, psi * theta_prev / (4.0 * t_prev) * dbeta_sq / du_sq);
    t = std::min(t, config.t_bar);

    const double residual = (forward_backward(problem, beta, u, t) - beta).norm();
    IterationRecord record = make_record(k, residual, t, config, beta);
    if (!(t > 0.0) || !std::isfinite(t)) {
      report.trace.push_back(std::move(record));
      report.step = t;
      finish(report, beta, SolverStatus::NumericalFailure, "adaptive stepsize collapsed to zero");
      return report;
    }
    const double theta = psi * t / t_prev;
    record.theta = theta;
    report.trace.push_back(std::move(record));
    report.step = t;
    if (diverged(beta, residual)) {
      finish(report, beta, SolverStatus::Diverged, "non-finite or exploding fixed-point residual");
      return report;
    }
    if (residual <= config.tol) {
      finish(report, beta, SolverStatus::Converged);
      return report;
    }
    if (k + 1 == config.max_iter) break;

    anchor_point = ((psi - 1.0) * beta + anchor_point) / psi;
    Vector next = forward_backward(problem, anchor_point, u, t);
    if (!next.allFinite()) {
      finish(report, beta, SolverStatus::Diverged, "non-finite iterate");
      return report;
    }
    Vector u_next;
    try {
      u_next = evaluate(*problem.u, next);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteOutput) throw;
      finish(report, beta, SolverStatus::Diverged, e.what());
      return report;
    }
    theta_prev = theta;
    t_prev = t;
    beta_prev = std::move(beta);
    u_prev = std::move(u);
    beta = std::move(next);
    u = std::move(u_next);
  }
  finish(report, beta, SolverStatus::MaxIterReached);
  return report;
}

SolverReport solve_lqa_newton(const EstimatingProblem& problem, const LqaPenalty& penalty,
                              const SolverConfig& config, const CoefficientVector& init) {
  validate_problem(problem);
  config.validate();
  require_init(problem, init, "init");
  const EstimatingFunction& u_fn = *problem.u;
  if (!u_fn.has_jacobian() && !config.allow_fd_jacobian) {
    throw Error(ErrorCode::JacobianUnavailable,
                "LQA-Newton needs the Jacobian of " + u_fn.name() + " (or finite differences enabled)");
  }
  // The fixed-point residual is only a stopping metric here; fall back to tau = 1.
  SolverReport report = empty_report(init, Method::Lqa);
  double tau = 1.0;
  if (config.tau) {
    tau = *config.tau;
  } else if (auto lipschitz = lipschitz_upper_bound(u_fn); lipschitz && *lipschitz > 0.0) {
    report.lipschitz = *lipschitz;
    tau = 1.0 / *lipschitz;
  }
  report.step = tau;
  report.zero_threshold = config.zero_threshold;

  // SCAD is nonconvex and has no prox here, so it gets an equation residual instead.
  const bool residual_applies = std::holds_alternative<LqaLasso>(penalty);

  const Index p = problem.dimension();
  if (const auto n = u_fn.sample_size(); n && p > *n) {
    report.flags.push_back("lqa_p_exceeds_n: p = " + std::to_string(p) + " > n = " + std::to_string(*n) +
                           "; each Newton step factors a p x p matrix at O(p^3) cost");
  }

  auto truncate = [&](const Vector& b) {
    Vector out = b;
    for (Index j = 0; j < p; ++j) {
      if (std::abs(out[j]) < config.zero_threshold) out[j] = 0.0;
    }
    return out;
  };

  Vector beta = init.values();
  Vector previous_truncated;
  for (int k = 0; k < config.max_iter; ++k) {
    const Vector truncated = truncate(beta);
    Vector u_beta;
    Vector u_trunc;
    try {
      u_beta = evaluate(u_fn, beta);
      u_trunc = truncated == beta ? u_beta : evaluate(u_fn, truncated);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteOutput) throw;
      finish(report, truncate(previous_truncated.size() ? previous_truncated : init.values()),
             SolverStatus::Diverged, e.what());
      return report;
    }
    double residual;
    if (residual_applies) {
      residual = (forward_backward(problem, truncated, u_trunc, tau) - truncated).norm();
    } else {
      const Vector weights = lqa_weight_diag(penalty, truncated, problem.lambda, config.epsilon_lqa);
      Vector q = u_trunc + weights.cwiseProduct(truncated);
      for (Index j = 0; j < p; ++j) {
        if (truncated[j] == 0.0) q[j] = std::max(std::abs(u_trunc[j]) - problem.lambda, 0.0);
      }
      residual = q.norm();
    }
    report.trace.push_back(make_record(k, residual, tau, config, truncated));
    previous_truncated = truncated;
    if (diverged(truncated, residual)) {
      finish(report, truncated, SolverStatus::Diverged, "non-finite or exploding residual");
      return report;
    }
    if (residual <= config.tol) {
      finish(report, truncated, SolverStatus::Converged);
      return report;
    }
    if (k + 1 == config.max_iter) break;

    const Vector weights = lqa_weight_diag(penalty, beta, problem.lambda, config.epsilon_lqa);
    Matrix system = jacobian(u_fn, beta, config.allow_fd_jacobian);
    system.diagonal() += weights;
    const Vector q = u_beta + weights.cwiseProduct(beta);
    Eigen::PartialPivLU<Matrix> lu(system);
    const double rcond = lu.rcond();
    Vector delta = lu.solve(q);
    if (!(rcond > 1e-16) || !delta.allFinite()) {
      finish(report, truncated, SolverStatus::NumericalFailure,
             "SingularSystem: Newton matrix is singular (rcond = " + std::to_string(rcond) + ")");
      return report;
    }
    beta -= delta;
  }
  finish(report, truncate(beta), SolverStatus::MaxIterReached);
  return report;
}

SolverReport solve_lqa_newton(const EstimatingProblem& problem, const SolverConfig& config,
                              const CoefficientVector& init) {
  return solve_lqa_newton(problem, lqa_penalty_from_spec(problem.penalty), config, init);
}

SolverReport solve_constrained(const EstimatingProblem& problem, const SolverConfig& config,
                               const CoefficientVector& init, Method method, std::optional<double> lipschitz) {
  const auto* indicator = std::get_if<BallIndicatorPenalty>(&problem.penalty.kind);
  if (!indicator) {
    throw Error(ErrorCode::UnsupportedPenalty, "constrained solve needs a ball indicator penalty, got " +
                                                   std::string(problem.penalty.name()));
  }
  if (method == Method::Lqa) {
    throw Error(ErrorCode::UnsupportedPenalty, "LQA-Newton cannot handle an indicator penalty");
  }
  validate_problem(problem);
  require_init(problem, init, "init");
  const CoefficientVector feasible(project_ball(indicator->ball, init.values()));
  EstimatingProblem projected = problem;
  projected.lambda = 1.0;
  switch (method) {
    case Method::Picard: return solve_picard(projected, config, feasible);
    case Method::KM: return solve_km(projected, config, feasible);
    case Method::GraAdaptive: return solve_gra_adaptive(projected, config, feasible);
    case Method::GraFixed: {
      const auto l = lipschitz ? lipschitz : lipschitz_upper_bound(*problem.u);
      if (!l) {
        throw Error(ErrorCode::StepOutOfRange,
                    "GRA-fixed needs a Lipschitz constant; none is known for " + problem.u->name());
      }
      return solve_gra_fixed(projected, config, *l, feasible);
    }
    case Method::Lqa: break;
  }
  throw Error(ErrorCode::UnsupportedPenalty, "unsupported method");
}

SolverReport solve(const EstimatingProblem& problem, const SolverConfig& config, const CoefficientVector& init,
                   Method method, std::optional<double> lipschitz) {
  if (!problem.u) throw Error(ErrorCode::DimensionMismatch, "problem has no estimating function");
  if (problem.penalty.is_indicator()) return solve_constrained(problem, config, init, method, lipschitz);
  switch (method) {
    case Method::Picard: return solve_picard(problem, config, init);
    case Method::KM: return solve_km(problem, config, init);
    case Method::GraAdaptive: return solve_gra_adaptive(problem, config, init);
    case Method::Lqa: return solve_lqa_newton(problem, config, init);
    case Method::GraFixed: {
      const auto l = lipschitz ? lipschitz : lipschitz_upper_bound(*problem.u);
      if (!l) {
        throw Error(ErrorCode::StepOutOfRange,
                    "GRA-fixed needs a Lipschitz constant to bound its step by phi/(2L); none is known for " +
                        problem.u->name() + ", so supply one");
      }
      return solve_gra_fixed(problem, config, *l, init);
    }
  }
  throw Error(ErrorCode::InvalidConfig, "unknown method");
}

SolverReport solve_at_lambda(const EstimatingProblem& base, double lambda, const SolverConfig& config,
                             const CoefficientVector& init, Method method, std::optional<double> lipschitz) {
  EstimatingProblem problem = base;
  problem.lambda = lambda;
  return solve(problem, config, init, method, lipschitz);
}

std::vector<PathEntry> solve_path(const EstimatingProblem& base, const std::vector<double>& lambdas,
                                  const SolverConfig& config, Method method, const CoefficientVector& init,
                                  const PathOptions& options) {
  if (lambdas.empty()) throw Error(ErrorCode::InvalidPath, "lambda grid is empty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0) || !std::isfinite(lambdas[i])) {
      throw Error(ErrorCode::InvalidPath, "lambda values must be positive and finite");
    }
    if (i > 0 && !(lambdas[i] < lambdas[i - 1])) {
      throw Error(ErrorCode::InvalidPath, "lambda grid must be strictly decreasing");
    }
  }
  validate_problem(base);

  std::vector<PathEntry> entries(lambdas.size());
  auto run_one = [&](std::size_t i, const CoefficientVector& start) {
    PathEntry& entry = entries[i];
    entry.lambda = lambdas[i];
    try {
      entry.report = solve_at_lambda(base, lambdas[i], config, start, method, options.lipschitz);
      const Vector& b = entry.report->solution.values();
      for (Index j = 0; j < b.size(); ++j) {
        if (b[j] != 0.0) entry.support.push_back(j);
      }
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
  };

  if (options.warm_start) {
    CoefficientVector start = init;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      run_one(i, start);
      if (entries[i].report) start = entries[i].report->solution;
    }
    return entries;
  }

  const int jobs = base.u->concurrency_safe() ? std::max(1, options.jobs) : 1;
  if (jobs == 1) {
    for (std::size_t i = 0; i < lambdas.size(); ++i) run_one(i, init);
    return entries;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < lambdas.size(); i = next++) run_one(i, init);
    });
  }
  for (auto& worker : workers) worker.join();
  return entries;
}

std::vector<double> auto_lambda_grid(double lambda_max, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidPath, "grid size must be >= 1");
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
    throw Error(ErrorCode::InvalidPath, "lambda_max must be positive; U(0) = 0 leaves nothing to regularize");
  }
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double exponent = n == 1 ? 0.0 : -2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    grid[static_cast<std::size_t>(i)] = i == 0 ? lambda_max : lambda_max * std::pow(10.0, exponent);
  }
  return grid;
}

double lasso_lambda_max(const EstimatingFunction& u) {
  return evaluate(u, Vector::Zero(u.dimension())).lpNorm<Eigen::Infinity>();
}

}  // namespace ree
