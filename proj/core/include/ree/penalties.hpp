#pragma once

#include <limits>
#include <variant>

#include "ree/types.hpp"

namespace ree {

/// Value returned by penalty_value for a point outside an indicator's set.
inline constexpr double kInfinitePenalty = std::numeric_limits<double>::infinity();

struct ProxResult {
  Vector point;
};

/// Omega(beta). BallIndicator gives 0 on C and kInfinitePenalty off it.
double penalty_value(const PenaltySpec& spec, const Vector& beta);

/// argmin_z 1/2 ||z - v||^2 + scale * Omega(z), in closed form.
///
/// For BallIndicator the scale is irrelevant and the result is the projection
/// onto C. A group whose (thresholded) norm is zero maps to zero.
ProxResult prox(const PenaltySpec& spec, const Vector& v, double scale);

/// Euclidean projection onto the ball. The L1 case uses sort-and-threshold.
Vector project_ball(const BallConstraint& ball, const Vector& y);

/// Coordinatewise sgn(x) (|x| - threshold)_+.
Vector soft_threshold(const Vector& x, double threshold);
double soft_threshold(double x, double threshold) noexcept;

/// p'_lambda(t) of SCAD:
/// lambda { I(t < lambda) + (a lambda - t)_+ / ((a - 1) lambda) I(t >= lambda) }.
double scad_derivative(double t, double lambda, double a);

/// Elementwise penalties usable by the local quadratic approximation.
struct LqaLasso {};
struct LqaScad {
  double a = 3.7;
};
using LqaPenalty = std::variant<LqaLasso, LqaScad>;

/// Maps a PenaltySpec onto an LQA penalty. Only Lasso is elementwise;
/// everything else throws UnsupportedPenalty.
LqaPenalty lqa_penalty_from_spec(const PenaltySpec& spec);

/// p'_lambda(|beta_j|) / (|beta_j| + epsilon) for every j.
Vector lqa_weight_diag(const LqaPenalty& penalty, const Vector& beta, double lambda, double epsilon);

}  // namespace ree
