#include "ree/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ree/estimating.hpp"
#include "ree/penalties.hpp"
#include "ree/solvers.hpp"

namespace ree {

namespace {

void require_dimension(const EstimatingProblem& problem, const Vector& beta) {
  if (beta.size() != problem.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "candidate has length " + std::to_string(beta.size()) +
                                                  " but p = " + std::to_string(problem.dimension()));
  }
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

Vector uniform_in_ball(std::mt19937_64& rng, Index p, double radius) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector direction(p);
  do {
    for (Index j = 0; j < p; ++j) direction[j] = normal(rng);
  } while (direction.norm() == 0.0);
  direction.normalize();
  return radius * std::pow(unit(rng), 1.0 / static_cast<double>(p)) * direction;
}

Vector feasible_sample(std::mt19937_64& rng, const BallConstraint& ball, Index p) {
  switch (ball.norm()) {
    case BallNorm::L2: return uniform_in_ball(rng, p, ball.radius());
    case BallNorm::L1: return project_ball(ball, uniform_in_ball(rng, p, ball.radius()));
    case BallNorm::Box: {
      Vector out(p);
      for (Index j = 0; j < p; ++j) {
        std::uniform_real_distribution<double> coord(ball.lower()[j], ball.upper()[j]);
        out[j] = ball.lower()[j] == ball.upper()[j] ? ball.lower()[j] : coord(rng);
      }
      return out;
    }
  }
  return Vector::Zero(p);
}

}  // namespace

double fixed_point_residual(const EstimatingProblem& problem, const Vector& beta, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(ErrorCode::InvalidConfig, "tau must be positive");
  validate_problem(problem);
  require_dimension(problem, beta);
  const Vector u = evaluate(*problem.u, beta);
  return (forward_backward(problem, beta, u, tau) - beta).norm();
}

KktReport kkt_residual(const EstimatingProblem& problem, const Vector& beta) {
  validate_problem(problem);
  require_dimension(problem, beta);
  const double lambda = problem.lambda;
  const Vector u = evaluate(*problem.u, beta);
  KktReport report;

  auto push = [&](double residual, bool active) {
    if (residual > report.max_residual || report.residuals.empty()) {
      if (residual > report.max_residual) report.max_residual = residual;
      report.worst_block = static_cast<Index>(report.residuals.size());
    }
    report.residuals.push_back(residual);
    report.active.push_back(active);
  };

  if (std::holds_alternative<LassoPenalty>(problem.penalty.kind)) {
    for (Index j = 0; j < beta.size(); ++j) {
      if (beta[j] != 0.0) {
        push(std::abs(u[j] + lambda * sign(beta[j])), true);
      } else {
        push(std::max(std::abs(u[j]) - lambda, 0.0), false);
      }
    }
    return report;
  }

  if (const auto* g = std::get_if<GroupLassoPenalty>(&problem.penalty.kind)) {
    const auto& groups = g->partition.groups();
    for (std::size_t k = 0; k < groups.size(); ++k) {
      const double w = g->partition.weight(k);
      double beta_sq = 0.0;
      for (Index j : groups[k]) beta_sq += beta[j] * beta[j];
      const double beta_norm = std::sqrt(beta_sq);
      double sq = 0.0;
      if (beta_norm > 0.0) {
        for (Index j : groups[k]) {
          const double r = u[j] + lambda * w * beta[j] / beta_norm;
          sq += r * r;
        }
        push(std::sqrt(sq), true);
      } else {
        for (Index j : groups[k]) sq += u[j] * u[j];
        push(std::max(std::sqrt(sq) - lambda * w, 0.0), false);
      }
    }
    return report;
  }

  if (const auto* s = std::get_if<SparseGroupLassoPenalty>(&problem.penalty.kind)) {
    const auto& groups = s->partition.groups();
    const double l1_level = lambda * s->alpha;
    for (std::size_t k = 0; k < groups.size(); ++k) {
      const double group_level = lambda * (1.0 - s->alpha) * s->partition.weight(k);
      double beta_sq = 0.0;
      for (Index j : groups[k]) beta_sq += beta[j] * beta[j];
      const double beta_norm = std::sqrt(beta_sq);
      double sq = 0.0;
      if (beta_norm > 0.0) {
        for (Index j : groups[k]) {
          double r;
          if (beta[j] != 0.0) {
            r = u[j] + group_level * beta[j] / beta_norm + l1_level * sign(beta[j]);
          } else {
            r = std::max(std::abs(u[j]) - l1_level, 0.0);
          }
          sq += r * r;
        }
        push(std::sqrt(sq), true);
      } else {
        for (Index j : groups[k]) {
          const double shrunk = std::max(std::abs(u[j]) - l1_level, 0.0);
          sq += shrunk * shrunk;
        }
        push(std::max(std::sqrt(sq) - group_level, 0.0), false);
      }
    }
    return report;
  }

  throw Error(ErrorCode::UnsupportedPenalty, std::string(problem.penalty.name()) +
                                                 " has no case-split KKT residual; use fixed_point_residual");
}

ViProbeResult vi_probe(const EstimatingProblem& problem, const Vector& beta_hat, int samples, double radius,
                       std::uint64_t seed, double threshold) {
  if (samples < 1) throw Error(ErrorCode::InvalidConfig, "vi_probe needs samples >= 1");
  validate_problem(problem);
  require_dimension(problem, beta_hat);
  const auto* indicator = std::get_if<BallIndicatorPenalty>(&problem.penalty.kind);
  if (!indicator && !(radius > 0.0)) throw Error(ErrorCode::InvalidRadius, "probe radius must be positive");

  const Index p = beta_hat.size();
  const Vector u = evaluate(*problem.u, beta_hat);
  const double omega_hat = indicator ? 0.0 : penalty_value(problem.penalty, beta_hat);

  ViProbeResult result;
  result.seed = seed;
  result.radius = radius;
  result.threshold = threshold;
  auto consider = [&](const Vector& b) {
    double value = u.dot(b - beta_hat);
    if (!indicator && problem.lambda != 0.0) value += problem.lambda * (penalty_value(problem.penalty, b) - omega_hat);
    ++result.samples;
    if (!result.worst_point || value < result.worst_value) {
      result.worst_value = value;
      result.worst_point = b;
    }
  };

  if (indicator) {
    consider(project_ball(indicator->ball, beta_hat - u));
  } else if (const double u_norm = u.norm(); u_norm > 0.0) {
    consider(beta_hat - (radius / u_norm) * u);
  } else {
    consider(beta_hat);
  }

  std::mt19937_64 rng(seed);
  for (int s = 1; s < samples; ++s) {
    if (indicator) {
      consider(feasible_sample(rng, indicator->ball, p));
    } else {
      consider(beta_hat + uniform_in_ball(rng, p, radius));
    }
  }
  result.passed = result.worst_value >= threshold;
  return result;
}

EnvelopeCheck rate_envelope_check(const std::vector<IterationRecord>& trace, const EnvelopeKind& kind) {
  if (trace.empty()) throw Error(ErrorCode::MissingTraceFields, "trace is empty");
  EnvelopeCheck check;
  auto fail_at = [&](int k) {
    if (check.passed) {
      check.passed = false;
      check.first_violation = k;
    }
  };

  if (const auto* geo = std::get_if<GeometricEnvelope>(&kind)) {
    for (const auto& record : trace) {
      if (!record.iterate) throw Error(ErrorCode::MissingTraceFields, "geometric check needs recorded iterates");
      if (record.iterate->size() != geo->reference.size()) {
        throw Error(ErrorCode::DimensionMismatch, "reference and iterate lengths differ");
      }
    }
    const double d0 = (*trace.front().iterate - geo->reference).norm();
    for (std::size_t k = 0; k < trace.size(); ++k) {
      const double dk = (*trace[k].iterate - geo->reference).norm();
      const double bound = std::pow(geo->rate, static_cast<double>(k)) * d0 * (1.0 + 1e-6);
      if (dk > bound) {
        fail_at(static_cast<int>(k));
        break;
      }
    }
    return check;
  }

  if (const auto* km = std::get_if<KmEnvelope>(&kind)) {
    if (!(km->rho > 0.0 && km->rho < 1.0)) throw Error(ErrorCode::InvalidRho, "rho must lie in (0, 1)");
    double best_sq = INFINITY;
    for (std::size_t k = 0; k < trace.size(); ++k) {
      best_sq = std::min(best_sq, trace[k].fp_residual * trace[k].fp_residual);
      const double bound = km->dist0_sq / (static_cast<double>(k + 1) * km->rho * (1.0 - km->rho));
      if (best_sq > bound) {
        fail_at(static_cast<int>(k));
        break;
      }
    }
    return check;
  }

  const auto& inv = std::get<InverseKEnvelope>(kind);
  if (inv.fit_window < 1) throw Error(ErrorCode::InvalidConfig, "fit window must be >= 1");
  std::vector<double> running_min(trace.size());
  double best = INFINITY;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    best = std::min(best, trace[k].fp_residual);
    running_min[k] = best;
  }
  double constant = 0.0;
  const std::size_t window = std::min<std::size_t>(static_cast<std::size_t>(inv.fit_window), trace.size());
  for (std::size_t k = 0; k < window; ++k) constant = std::max(constant, static_cast<double>(k + 1) * running_min[k]);
  check.constant = constant;
  const std::size_t limit = std::min<std::size_t>(trace.size(), static_cast<std::size_t>(inv.max_k) + 1);
  for (std::size_t k = 0; k < limit; ++k) {
    if (running_min[k] > constant / static_cast<double>(k + 1)) {
      fail_at(static_cast<int>(k));
      break;
    }
  }
  return check;
}

}  // namespace ree
