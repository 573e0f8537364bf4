#include "ree/oracles.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

namespace ree::oracle {

namespace {

double shrink(double x, double c) {
  if (x > c) return x - c;
  if (x < -c) return x + c;
  return 0.0;
}

using Point = std::array<long long, 3>;

}  // namespace

Vector lasso_cd(const Matrix& x, const Vector& y, double lambda, double tol, int max_sweeps) {
  const Index p = x.cols();
  if (p > 50) throw Error(ErrorCode::InstanceTooLarge, "coordinate descent oracle is limited to p <= 50");
  if (x.rows() != y.size()) throw Error(ErrorCode::DimensionMismatch, "design and response lengths differ");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidLambda, "lambda must be >= 0");
  Vector beta = Vector::Zero(p);
  Vector residual = y;
  Vector col_sq(p);
  for (Index j = 0; j < p; ++j) col_sq[j] = x.col(j).squaredNorm();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double largest = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (col_sq[j] == 0.0) continue;
      const double old = beta[j];
      const double rho = x.col(j).dot(residual) + col_sq[j] * old;
      const double updated = shrink(rho, lambda) / col_sq[j];
      if (updated != old) {
        residual -= (updated - old) * x.col(j);
        beta[j] = updated;
        largest = std::max(largest, std::abs(updated - old));
      }
    }
    if (largest <= tol) break;
  }
  return beta;
}

double penalty_by_definition(const PenaltySpec& spec, const Vector& z) {
  const Index p = z.size();
  auto abs_sum = [&] {
    double s = 0.0;
    for (Index j = 0; j < p; ++j) s += std::abs(z[j]);
    return s;
  };
  auto sq_sum = [&] {
    double s = 0.0;
    for (Index j = 0; j < p; ++j) s += z[j] * z[j];
    return s;
  };
  auto group_sum = [&](const GroupPartition& part) {
    double s = 0.0;
    for (std::size_t g = 0; g < part.size(); ++g) {
      double sq = 0.0;
      for (Index j : part.groups()[g]) sq += z[j] * z[j];
      s += part.weight(g) * std::sqrt(sq);
    }
    return s;
  };

  if (std::holds_alternative<RidgePenalty>(spec.kind)) return sq_sum();
  if (std::holds_alternative<LassoPenalty>(spec.kind)) return abs_sum();
  if (const auto* e = std::get_if<ElasticNetPenalty>(&spec.kind)) return abs_sum() + e->ratio * sq_sum();
  if (const auto* g = std::get_if<GroupLassoPenalty>(&spec.kind)) return group_sum(g->partition);
  if (const auto* s = std::get_if<SparseGroupLassoPenalty>(&spec.kind)) {
    return (1.0 - s->alpha) * group_sum(s->partition) + s->alpha * abs_sum();
  }
  const auto& ball = std::get<BallIndicatorPenalty>(spec.kind).ball;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  switch (ball.norm()) {
    case BallNorm::L1: return abs_sum() <= ball.radius() ? 0.0 : kInf;
    case BallNorm::L2: return std::sqrt(sq_sum()) <= ball.radius() ? 0.0 : kInf;
    case BallNorm::Box:
      for (Index j = 0; j < p; ++j) {
        if (z[j] < ball.lower()[j] || z[j] > ball.upper()[j]) return kInf;
      }
      return 0.0;
  }
  return kInf;
}

Vector grid_prox(const PenaltySpec& spec, const Vector& v, double scale, double grid_halfwidth, double grid_step) {
  const Index p = v.size();
  if (p < 1 || p > 3) throw Error(ErrorCode::InstanceTooLarge, "grid oracle is limited to 1 <= p <= 3");
  if (!(grid_step > 0.0) || !(grid_halfwidth >= grid_step)) {
    throw Error(ErrorCode::InvalidConfig, "grid needs 0 < step <= halfwidth");
  }
  if (!(scale >= 0.0)) throw Error(ErrorCode::NegativeScale, "scale must be >= 0");
  const bool indicator = spec.is_indicator();
  const long long limit = static_cast<long long>(std::floor(grid_halfwidth / grid_step + 1e-9));

  Vector z(p);
  auto objective = [&](const Point& m) {
    for (Index j = 0; j < p; ++j) z[j] = static_cast<double>(m[j]) * grid_step;
    const double omega = penalty_by_definition(spec, z);
    if (std::isinf(omega)) return std::numeric_limits<double>::infinity();
    const double quad = 0.5 * (z - v).squaredNorm();
    if (indicator || scale == 0.0) return quad;
    return quad + scale * omega;
  };

  Point best{0, 0, 0};
  double best_value = std::numeric_limits<double>::infinity();
  // Scans center + unit * [-half, half] per coordinate, clipped to the box.
  auto scan = [&](const Point& center, long long unit, long long half) {
    Point lo{0, 0, 0}, hi{0, 0, 0};
    for (Index j = 0; j < p; ++j) {
      lo[j] = -half;
      hi[j] = half;
      while (center[j] + lo[j] * unit < -limit) ++lo[j];
      while (center[j] + hi[j] * unit > limit) --hi[j];
    }
    Point offset = lo;
    Point local_best = center;
    double local_value = std::numeric_limits<double>::infinity();
    while (true) {
      Point m{0, 0, 0};
      for (Index j = 0; j < p; ++j) m[j] = center[j] + offset[j] * unit;
      const double value = objective(m);
      if (value < local_value) {
        local_value = value;
        local_best = m;
      }
      Index j = 0;
      while (j < p && offset[j] == hi[j]) {
        offset[j] = lo[j];
        ++j;
      }
      if (j == p) break;
      ++offset[j];
    }
    bool on_edge = false;
    for (Index j = 0; j < p; ++j) {
      const long long off = (local_best[j] - center[j]) / unit;
      if ((off == -half && center[j] - half * unit >= -limit) || (off == half && center[j] + half * unit <= limit)) {
        on_edge = true;
      }
    }
    best = local_best;
    best_value = local_value;
    return on_edge;
  };

  long long unit = 1;
  while (2 * limit / unit > 64) unit *= kRefineFactor;
  scan(Point{0, 0, 0}, unit, limit / unit);
  while (unit > 1) {
    unit /= kRefineFactor;
    for (int rescans = 0; rescans < 1000; ++rescans) {
      if (!scan(best, unit, kRefineWindow)) break;
    }
  }
  if (std::isinf(best_value)) throw Error(ErrorCode::InvalidConfig, "grid contains no feasible point");

  Vector out(p);
  for (Index j = 0; j < p; ++j) out[j] = static_cast<double>(best[j]) * grid_step;
  return out;
}

}  // namespace ree::oracle
