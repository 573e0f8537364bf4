#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ree/problem.hpp"
#include "ree/types.hpp"

namespace ree {

/// ||prox_{tau lambda Omega}(beta - tau U(beta)) - beta||_2.
double fixed_point_residual(const EstimatingProblem& problem, const Vector& beta, double tau);

struct KktReport {
  /// One entry per coordinate (lasso) or per group (group / sparse group lasso).
  std::vector<double> residuals;
  /// Whether the coordinate or group is nonzero.
  std::vector<bool> active;
  double max_residual = 0.0;
  Index worst_block = 0;
};

/// Case-split subgradient residuals of 0 in U(beta) + lambda dOmega(beta).
///
/// Lasso, per coordinate: |U_j + lambda sgn(beta_j)| if beta_j != 0, else
/// (|U_j| - lambda)_+. Group lasso, per group: ||U_g + lambda w_g beta_g/||beta_g|| ||
/// if beta_g != 0, else (||U_g|| - lambda w_g)_+. Sparse group lasso combines
/// both; its zero groups use (||S_{lambda alpha}(U_g)|| - lambda (1-alpha) w_g)_+.
/// Other penalties throw UnsupportedPenalty.
KktReport kkt_residual(const EstimatingProblem& problem, const Vector& beta);

struct ViProbeResult {
  bool passed = true;
  /// Most negative value of U(b^)^T (b - b^) + lambda (Omega(b) - Omega(b^)).
  double worst_value = 0.0;
  std::optional<Vector> worst_point;
  int samples = 0;
  std::uint64_t seed = 0;
  double radius = 0.0;
  double threshold = -1e-8;
};

/// Samples the variational inequality at the given candidate.
///
/// Unconstrained problems draw b uniformly from the ball of the given radius
/// centred at beta_hat. Indicator problems draw feasible points of C only
/// (uniform in L2 ball / box, projected draws for L1) and the lambda term
/// vanishes. The first probe is always the point b^ - s U(b^) (projected for
/// indicator problems). Passes when every value is >= threshold.
ViProbeResult vi_probe(const EstimatingProblem& problem, const Vector& beta_hat, int samples, double radius,
                       std::uint64_t seed, double threshold = -1e-8);

struct GeometricEnvelope {
  double rate = 0.5;
  Vector reference;
};
struct KmEnvelope {
  double rho = 0.5;
  /// ||beta^(0) - beta_hat||^2.
  double dist0_sq = 0.0;
};
struct InverseKEnvelope {
  /// Number of leading records the constant C is fitted on.
  int fit_window = 10;
  int max_k = 10000;
};
using EnvelopeKind = std::variant<GeometricEnvelope, KmEnvelope, InverseKEnvelope>;

struct EnvelopeCheck {
  bool passed = true;
  std::optional<int> first_violation;
  /// Fitted C for InverseK.
  std::optional<double> constant;
};

/// Checks a solver trace against a convergence-rate envelope.
///
/// Geometric: ||beta^(k) - ref|| <= L^k ||beta^(0) - ref|| (1 + 1e-6); needs iterates.
/// KM: min_{j<=k} r_j^2 <= dist0_sq / ((k + 1) rho (1 - rho)).
/// InverseK: min_{j<=k} r_j <= C / (k + 1), C = max over the fit window of
/// (k + 1) min_{j<=k} r_j.
EnvelopeCheck rate_envelope_check(const std::vector<IterationRecord>& trace, const EnvelopeKind& kind);

}  // namespace ree
