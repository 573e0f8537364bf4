#pragma once

#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ree/error.hpp"

namespace ree {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kGoldenRatio = std::numbers::phi;

/// Dense coefficient vector beta with p >= 1 finite entries.
class CoefficientVector {
 public:
  explicit CoefficientVector(Vector values);
  CoefficientVector(std::initializer_list<double> values);

  /// Zero vector of length p.
  static CoefficientVector zeros(Index p);

  const Vector& values() const noexcept { return values_; }
  Index size() const noexcept { return values_.size(); }
  double operator[](Index j) const { return values_[j]; }

  friend bool operator==(const CoefficientVector& a, const CoefficientVector& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  Vector values_;
};

/// Non-overlapping partition of the coefficient indices, stored 0-based.
/// Covering of {0, ..., p-1} is checked against a concrete dimension by
/// covers() / validate_problem, since a partition alone does not know p.
class GroupPartition {
 public:
  GroupPartition(std::vector<std::vector<Index>> groups, std::vector<double> weights = {});

  /// Builds a partition from 1-based index lists as used in problem files.
  static GroupPartition from_one_based(const std::vector<std::vector<long long>>& groups,
                                       std::vector<double> weights = {});

  const std::vector<std::vector<Index>>& groups() const noexcept { return groups_; }
  std::size_t size() const noexcept { return groups_.size(); }
  double weight(std::size_t g) const noexcept { return weights_[g]; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  bool weighted() const noexcept { return weighted_; }

  /// Largest index plus one.
  Index extent() const noexcept { return extent_; }

  /// Throws UncoveredIndex / DimensionMismatch unless the groups cover exactly {0..p-1}.
  void require_covers(Index p) const;

 private:
  std::vector<std::vector<Index>> groups_;
  std::vector<double> weights_;
  bool weighted_ = false;
  Index extent_ = 0;
};

enum class BallNorm { L1, L2, Box };

/// Feasible set C for the constrained form: {beta : Phi(beta) <= r} or a box.
class BallConstraint {
 public:
  static BallConstraint l1(double radius);
  static BallConstraint l2(double radius);
  /// Box requires lower <= 0 <= upper coordinatewise.
  static BallConstraint box(Vector lower, Vector upper);

  BallNorm norm() const noexcept { return norm_; }
  double radius() const noexcept { return radius_; }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }

  bool contains(const Vector& beta, double slack = 0.0) const;

 private:
  BallConstraint() = default;
  BallNorm norm_ = BallNorm::L2;
  double radius_ = 0.0;
  Vector lower_;
  Vector upper_;
};

struct RidgePenalty {};
struct LassoPenalty {};
/// ||beta||_1 + ratio * ||beta||_2^2.
struct ElasticNetPenalty {
  double ratio = 0.0;
};
struct GroupLassoPenalty {
  GroupPartition partition;
};
/// sum_g (1 - alpha) w_g ||beta_g||_2 + alpha ||beta||_1.
struct SparseGroupLassoPenalty {
  GroupPartition partition;
  double alpha = 0.5;
};
struct BallIndicatorPenalty {
  BallConstraint ball;
};

using PenaltyKind = std::variant<RidgePenalty, LassoPenalty, ElasticNetPenalty, GroupLassoPenalty,
                                 SparseGroupLassoPenalty, BallIndicatorPenalty>;

/// Algebraic description of the convex penalty Omega.
struct PenaltySpec {
  PenaltyKind kind;

  static PenaltySpec ridge() { return {RidgePenalty{}}; }
  static PenaltySpec lasso() { return {LassoPenalty{}}; }
  static PenaltySpec elastic_net(double ratio) { return {ElasticNetPenalty{ratio}}; }
  static PenaltySpec group_lasso(GroupPartition partition) {
    return {GroupLassoPenalty{std::move(partition)}};
  }
  static PenaltySpec sparse_group_lasso(GroupPartition partition, double alpha) {
    return {SparseGroupLassoPenalty{std::move(partition), alpha}};
  }
  static PenaltySpec ball_indicator(BallConstraint ball) { return {BallIndicatorPenalty{std::move(ball)}}; }

  std::string_view name() const noexcept;
  bool is_indicator() const noexcept { return std::holds_alternative<BallIndicatorPenalty>(kind); }
  const GroupPartition* partition() const noexcept;

  /// Checks the parameter invariants that do not depend on the problem dimension.
  void validate() const;
};

struct SolverConfig {
  /// Picard/KM stepsize; when unset the solvers use 1/L from lipschitz_upper_bound.
  std::optional<double> tau;
  double rho = 0.5;
  /// GRA fixed stepsize; when unset the solver uses phi / (2L).
  std::optional<double> step;
  double t_bar = 1e6;
  double psi = kGoldenRatio;
  double epsilon_lqa = 1e-10;
  double zero_threshold = 1e-8;
  int max_iter = 10000;
  double tol = 1e-8;
  bool allow_fd_jacobian = false;
  /// Store every iterate in the trace. Needed by the geometric envelope check.
  bool record_iterates = false;

  void validate() const;
};

enum class SolverStatus { Converged, MaxIterReached, Diverged, NumericalFailure };
std::string_view to_string(SolverStatus status) noexcept;
std::optional<SolverStatus> solver_status_from_string(std::string_view name) noexcept;

enum class Method { Picard, KM, GraFixed, GraAdaptive, Lqa };
std::string_view to_string(Method method) noexcept;
std::optional<Method> method_from_string(std::string_view name) noexcept;

struct IterationRecord {
  int k = 0;
  double fp_residual = 0.0;
  double step = 0.0;
  /// theta_k of the adaptive golden ratio algorithm.
  std::optional<double> theta;
  std::optional<Vector> iterate;
};

struct SolverReport {
  CoefficientVector solution;
  SolverStatus status = SolverStatus::MaxIterReached;
  /// Number of trace records; the last record carries k = iterations - 1.
  int iterations = 0;
  std::vector<IterationRecord> trace;
  Method method = Method::Picard;
  /// Stepsize the fixed-point residual is measured with (tau, t, or the final t_k).
  double step = 0.0;
  std::optional<double> lipschitz;
  std::optional<double> zero_threshold;
  std::vector<std::string> flags;
  std::string message;

  bool converged() const noexcept { return status == SolverStatus::Converged; }
  double final_residual() const noexcept { return trace.empty() ? 0.0 : trace.back().fp_residual; }
};

}  // namespace ree
