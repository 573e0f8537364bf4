#include "ree/penalties.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace ree {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_dimension(const PenaltySpec& spec, Index p) {
  if (p < 1) throw Error(ErrorCode::DimensionMismatch, "empty coefficient vector");
  if (const GroupPartition* partition = spec.partition()) partition->require_covers(p);
  if (const auto* ind = std::get_if<BallIndicatorPenalty>(&spec.kind)) {
    if (ind->ball.norm() == BallNorm::Box && ind->ball.lower().size() != p) {
      throw Error(ErrorCode::DimensionMismatch, "box has " + std::to_string(ind->ball.lower().size()) +
                                                    " coordinates, vector has " + std::to_string(p));
    }
  }
}

double group_norm(const Vector& x, const std::vector<Index>& group) {
  double sq = 0.0;
  for (Index j : group) sq += x[j] * x[j];
  return std::sqrt(sq);
}

// Writes factor * x_g into out_g, where factor = (1 - threshold / ||x_g||)_+ and 0 at ||x_g|| = 0.
void group_shrink(const Vector& x, const std::vector<Index>& group, double threshold, Vector& out) {
  const double norm = group_norm(x, group);
  const double factor = norm > 0.0 ? std::max(1.0 - threshold / norm, 0.0) : 0.0;
  for (Index j : group) out[j] = factor * x[j];
}

}  // namespace

double soft_threshold(double x, double threshold) noexcept {
  if (x > threshold) return x - threshold;
  if (x < -threshold) return x + threshold;
  return 0.0;
}

Vector soft_threshold(const Vector& x, double threshold) {
  Vector out(x.size());
  for (Index j = 0; j < x.size(); ++j) out[j] = soft_threshold(x[j], threshold);
  return out;
}

double penalty_value(const PenaltySpec& spec, const Vector& beta) {
  require_dimension(spec, beta.size());
  return std::visit(
      Overloaded{
          [&](const RidgePenalty&) { return beta.squaredNorm(); },
          [&](const LassoPenalty&) { return beta.lpNorm<1>(); },
          [&](const ElasticNetPenalty& e) { return beta.lpNorm<1>() + e.ratio * beta.squaredNorm(); },
          [&](const GroupLassoPenalty& g) {
            double total = 0.0;
            const auto& groups = g.partition.groups();
            for (std::size_t k = 0; k < groups.size(); ++k) {
              total += g.partition.weight(k) * group_norm(beta, groups[k]);
            }
            return total;
          },
          [&](const SparseGroupLassoPenalty& s) {
            double total = 0.0;
            const auto& groups = s.partition.groups();
            for (std::size_t k = 0; k < groups.size(); ++k) {
              total += (1.0 - s.alpha) * s.partition.weight(k) * group_norm(beta, groups[k]);
            }
            return total + s.alpha * beta.lpNorm<1>();
          },
          [&](const BallIndicatorPenalty& b) { return b.ball.contains(beta) ? 0.0 : kInfinitePenalty; },
      },
      spec.kind);
}

ProxResult prox(const PenaltySpec& spec, const Vector& v, double scale) {
  if (std::isnan(scale) || scale < 0.0) throw Error(ErrorCode::NegativeScale, "prox scale must be >= 0");
  if (!std::isfinite(scale)) throw Error(ErrorCode::NegativeScale, "prox scale must be finite");
  require_dimension(spec, v.size());
  if (const auto* ind = std::get_if<BallIndicatorPenalty>(&spec.kind)) return {project_ball(ind->ball, v)};
  if (scale == 0.0) return {v};

  return std::visit(
      Overloaded{
          [&](const RidgePenalty&) { return ProxResult{v / (1.0 + 2.0 * scale)}; },
          [&](const LassoPenalty&) { return ProxResult{soft_threshold(v, scale)}; },
          [&](const ElasticNetPenalty& e) {
            return ProxResult{soft_threshold(v, scale) / (1.0 + 2.0 * scale * e.ratio)};
          },
          [&](const GroupLassoPenalty& g) {
            Vector out(v.size());
            const auto& groups = g.partition.groups();
            for (std::size_t k = 0; k < groups.size(); ++k) {
              group_shrink(v, groups[k], scale * g.partition.weight(k), out);
            }
            return ProxResult{std::move(out)};
          },
          [&](const SparseGroupLassoPenalty& s) {
            const Vector thresholded = soft_threshold(v, s.alpha * scale);
            Vector out(v.size());
            const auto& groups = s.partition.groups();
            for (std::size_t k = 0; k < groups.size(); ++k) {
              group_shrink(thresholded, groups[k], (1.0 - s.alpha) * scale * s.partition.weight(k), out);
            }
            return ProxResult{std::move(out)};
          },
          [&](const BallIndicatorPenalty&) { return ProxResult{v}; },
      },
      spec.kind);
}

Vector project_ball(const BallConstraint& ball, const Vector& y) {
  if (!y.allFinite()) throw Error(ErrorCode::NonFiniteInput, "projection input has non-finite entries");
  switch (ball.norm()) {
    case BallNorm::L2: {
      const double norm = y.norm();
      if (norm <= ball.radius()) return y;
      return (ball.radius() / norm) * y;
    }
    case BallNorm::Box: {
      if (y.size() != ball.lower().size()) {
        throw Error(ErrorCode::DimensionMismatch, "box has " + std::to_string(ball.lower().size()) +
                                                      " coordinates, vector has " + std::to_string(y.size()));
      }
      return y.cwiseMax(ball.lower()).cwiseMin(ball.upper());
    }
    case BallNorm::L1: {
      const double r = ball.radius();
      if (y.lpNorm<1>() <= r) return y;
      if (r == 0.0) return Vector::Zero(y.size());
      std::vector<double> mags(static_cast<std::size_t>(y.size()));
      for (Index j = 0; j < y.size(); ++j) mags[static_cast<std::size_t>(j)] = std::abs(y[j]);
      std::sort(mags.begin(), mags.end(), std::greater<>());
      // theta is the threshold at which the soft-thresholded l1 norm equals r.
      double cumulative = 0.0;
      double theta = 0.0;
      for (std::size_t k = 0; k < mags.size(); ++k) {
        cumulative += mags[k];
        const double candidate = (cumulative - r) / static_cast<double>(k + 1);
        if (mags[k] - candidate > 0.0) theta = candidate;
      }
      return soft_threshold(y, theta);
    }
  }
  return y;
}

double scad_derivative(double t, double lambda, double a) {
  if (!(a > 2.0)) throw Error(ErrorCode::InvalidA, "SCAD requires a > 2");
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidLambda, "SCAD requires lambda > 0");
  const double abs_t = std::abs(t);
  if (abs_t < lambda) return lambda;
  return lambda * std::max(a * lambda - abs_t, 0.0) / ((a - 1.0) * lambda);
}

LqaPenalty lqa_penalty_from_spec(const PenaltySpec& spec) {
  if (std::holds_alternative<LassoPenalty>(spec.kind)) return LqaLasso{};
  throw Error(ErrorCode::UnsupportedPenalty,
              std::string(spec.name()) + " is not elementwise separable; LQA supports lasso and SCAD only");
}

Vector lqa_weight_diag(const LqaPenalty& penalty, const Vector& beta, double lambda, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidConfig, "LQA epsilon must be > 0");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidLambda, "lambda must be >= 0");
  Vector weights(beta.size());
  for (Index j = 0; j < beta.size(); ++j) {
    const double abs_b = std::abs(beta[j]);
    const double derivative = std::visit(
        Overloaded{
            [&](const LqaLasso&) { return lambda; },
            [&](const LqaScad& s) {
              if (!(s.a > 2.0)) throw Error(ErrorCode::InvalidA, "SCAD requires a > 2");
              return lambda > 0.0 ? scad_derivative(abs_b, lambda, s.a) : 0.0;
            },
        },
        penalty);
    weights[j] = derivative / (abs_b + epsilon);
  }
  return weights;
}

}  // namespace ree
