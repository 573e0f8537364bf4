#include "ree/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ree {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OverlappingGroups: return "OverlappingGroups";
    case ErrorCode::UncoveredIndex: return "UncoveredIndex";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::InvalidRatio: return "InvalidRatio";
    case ErrorCode::InvalidWeight: return "InvalidWeight";
    case ErrorCode::InvalidLambda: return "InvalidLambda";
    case ErrorCode::InvalidRadius: return "InvalidRadius";
    case ErrorCode::InvalidBox: return "InvalidBox";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::InvalidResponse: return "InvalidResponse";
    case ErrorCode::NegativeScale: return "NegativeScale";
    case ErrorCode::InvalidA: return "InvalidA";
    case ErrorCode::UnsupportedPenalty: return "UnsupportedPenalty";
    case ErrorCode::NonFiniteOutput: return "NonFiniteOutput";
    case ErrorCode::JacobianUnavailable: return "JacobianUnavailable";
    case ErrorCode::StepOutOfRange: return "StepOutOfRange";
    case ErrorCode::DegenerateInit: return "DegenerateInit";
    case ErrorCode::InvalidRho: return "InvalidRho";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::MissingTraceFields: return "MissingTraceFields";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::InvalidPath: return "InvalidPath";
  }
  return "Unknown";
}

namespace {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw Error(ErrorCode::NonFiniteInput, std::string(what) + " has non-finite entries");
  }
}

}  // namespace

CoefficientVector::CoefficientVector(Vector values) : values_(std::move(values)) {
  if (values_.size() < 1) throw Error(ErrorCode::DimensionMismatch, "coefficient vector must have p >= 1");
  require_finite(values_, "coefficient vector");
}

CoefficientVector::CoefficientVector(std::initializer_list<double> values)
    : CoefficientVector(Vector(Eigen::Map<const Vector>(values.begin(), static_cast<Index>(values.size())))) {}

CoefficientVector CoefficientVector::zeros(Index p) { return CoefficientVector(Vector::Zero(p)); }

GroupPartition::GroupPartition(std::vector<std::vector<Index>> groups, std::vector<double> weights)
    : groups_(std::move(groups)), weights_(std::move(weights)) {
  if (groups_.empty()) throw Error(ErrorCode::EmptyGroup, "partition has no groups");
  weighted_ = !weights_.empty();
  if (!weighted_) {
    weights_.assign(groups_.size(), 1.0);
  } else if (weights_.size() != groups_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "got " + std::to_string(weights_.size()) + " weights for " +
                                                  std::to_string(groups_.size()) + " groups");
  }
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (groups_[g].empty()) throw Error(ErrorCode::EmptyGroup, "group " + std::to_string(g + 1) + " is empty");
    if (!(weights_[g] > 0.0) || !std::isfinite(weights_[g])) {
      throw Error(ErrorCode::InvalidWeight, "group " + std::to_string(g + 1) + " weight must be positive");
    }
    for (Index j : groups_[g]) {
      if (j < 0) throw Error(ErrorCode::UncoveredIndex, "negative index in group " + std::to_string(g + 1));
      extent_ = std::max(extent_, j + 1);
    }
  }
  std::vector<int> owner(static_cast<std::size_t>(extent_), -1);
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    for (Index j : groups_[g]) {
      auto& slot = owner[static_cast<std::size_t>(j)];
      if (slot != -1) {
        throw Error(ErrorCode::OverlappingGroups,
                    "index " + std::to_string(j + 1) + " appears in more than one group");
      }
      slot = static_cast<int>(g);
    }
  }
}

GroupPartition GroupPartition::from_one_based(const std::vector<std::vector<long long>>& groups,
                                              std::vector<double> weights) {
  std::vector<std::vector<Index>> zero_based;
  zero_based.reserve(groups.size());
  for (const auto& group : groups) {
    auto& out = zero_based.emplace_back();
    out.reserve(group.size());
    for (long long j : group) {
      if (j < 1) throw Error(ErrorCode::UncoveredIndex, "group indices are 1-based; got " + std::to_string(j));
      out.push_back(static_cast<Index>(j - 1));
    }
  }
  return GroupPartition(std::move(zero_based), std::move(weights));
}

void GroupPartition::require_covers(Index p) const {
  if (extent_ > p) {
    throw Error(ErrorCode::DimensionMismatch,
                "partition refers to index " + std::to_string(extent_) + " but p = " + std::to_string(p));
  }
  std::vector<bool> seen(static_cast<std::size_t>(p), false);
  for (const auto& group : groups_) {
    for (Index j : group) seen[static_cast<std::size_t>(j)] = true;
  }
  for (Index j = 0; j < p; ++j) {
    if (!seen[static_cast<std::size_t>(j)]) {
      throw Error(ErrorCode::UncoveredIndex, "index " + std::to_string(j + 1) + " is in no group");
    }
  }
}

BallConstraint BallConstraint::l1(double radius) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::InvalidRadius, "radius must be finite and >= 0");
  }
  BallConstraint ball;
  ball.norm_ = BallNorm::L1;
  ball.radius_ = radius;
  return ball;
}

BallConstraint BallConstraint::l2(double radius) {
  BallConstraint ball = l1(radius);
  ball.norm_ = BallNorm::L2;
  return ball;
}

BallConstraint BallConstraint::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw Error(ErrorCode::InvalidBox, "box bounds must be nonempty and of equal length");
  }
  for (Index j = 0; j < lower.size(); ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || !(lower[j] <= 0.0) || !(upper[j] >= 0.0)) {
      throw Error(ErrorCode::InvalidBox,
                  "box coordinate " + std::to_string(j + 1) + " must satisfy lower <= 0 <= upper");
    }
  }
  BallConstraint ball;
  ball.norm_ = BallNorm::Box;
  ball.lower_ = std::move(lower);
  ball.upper_ = std::move(upper);
  return ball;
}

bool BallConstraint::contains(const Vector& beta, double slack) const {
  switch (norm_) {
    case BallNorm::L1: return beta.lpNorm<1>() <= radius_ + slack;
    case BallNorm::L2: return beta.norm() <= radius_ + slack;
    case BallNorm::Box:
      if (beta.size() != lower_.size()) return false;
      return ((beta - lower_).array() >= -slack).all() && ((upper_ - beta).array() >= -slack).all();
  }
  return false;
}

std::string_view PenaltySpec::name() const noexcept {
  struct Visitor {
    std::string_view operator()(const RidgePenalty&) const { return "ridge"; }
    std::string_view operator()(const LassoPenalty&) const { return "lasso"; }
    std::string_view operator()(const ElasticNetPenalty&) const { return "elastic_net"; }
    std::string_view operator()(const GroupLassoPenalty&) const { return "group_lasso"; }
    std::string_view operator()(const SparseGroupLassoPenalty&) const { return "sparse_group_lasso"; }
    std::string_view operator()(const BallIndicatorPenalty&) const { return "ball"; }
  };
  return std::visit(Visitor{}, kind);
}

const GroupPartition* PenaltySpec::partition() const noexcept {
  if (const auto* g = std::get_if<GroupLassoPenalty>(&kind)) return &g->partition;
  if (const auto* s = std::get_if<SparseGroupLassoPenalty>(&kind)) return &s->partition;
  return nullptr;
}

void PenaltySpec::validate() const {
  if (const auto* e = std::get_if<ElasticNetPenalty>(&kind)) {
    if (!(e->ratio >= 0.0) || !std::isfinite(e->ratio)) {
      throw Error(ErrorCode::InvalidRatio, "elastic net ratio must be finite and >= 0");
    }
  }
  if (const auto* s = std::get_if<SparseGroupLassoPenalty>(&kind)) {
    if (!(s->alpha >= 0.0 && s->alpha <= 1.0)) {
      throw Error(ErrorCode::InvalidAlpha, "sparse group lasso alpha must lie in [0, 1]");
    }
  }
}

void SolverConfig::validate() const {
  auto positive = [](double x) { return x > 0.0 && std::isfinite(x); };
  if (tau && !positive(*tau)) throw Error(ErrorCode::InvalidConfig, "tau must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorCode::InvalidRho, "rho must lie in (0, 1)");
  if (step && !positive(*step)) throw Error(ErrorCode::StepOutOfRange, "step must be positive");
  if (!positive(t_bar)) throw Error(ErrorCode::InvalidConfig, "t_bar must be positive");
  if (!(psi > 1.0 && psi <= kGoldenRatio * (1.0 + 1e-15))) {
    throw Error(ErrorCode::InvalidConfig, "psi must lie in (1, (sqrt(5)+1)/2]");
  }
  if (!positive(epsilon_lqa)) throw Error(ErrorCode::InvalidConfig, "epsilon_lqa must be positive");
  if (!positive(zero_threshold)) throw Error(ErrorCode::InvalidConfig, "zero_threshold must be positive");
  if (max_iter < 1) throw Error(ErrorCode::InvalidConfig, "max_iter must be >= 1");
  if (!positive(tol)) throw Error(ErrorCode::InvalidConfig, "tol must be positive");
}

std::string_view to_string(SolverStatus status) noexcept {
  switch (status) {
    case SolverStatus::Converged: return "Converged";
    case SolverStatus::MaxIterReached: return "MaxIterReached";
    case SolverStatus::Diverged: return "Diverged";
    case SolverStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

std::optional<SolverStatus> solver_status_from_string(std::string_view name) noexcept {
  for (auto s : {SolverStatus::Converged, SolverStatus::MaxIterReached, SolverStatus::Diverged,
                 SolverStatus::NumericalFailure}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Picard: return "picard";
    case Method::KM: return "km";
    case Method::GraFixed: return "gra-fixed";
    case Method::GraAdaptive: return "gra-adaptive";
    case Method::Lqa: return "lqa";
  }
  return "unknown";
}

std::optional<Method> method_from_string(std::string_view name) noexcept {
  for (auto m : {Method::Picard, Method::KM, Method::GraFixed, Method::GraAdaptive, Method::Lqa}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

}  // namespace ree
