#include "ree/problem.hpp"

#include <cmath>
#include <string>

namespace ree {

const EstimatingProblem& validate_problem(const EstimatingProblem& problem) {
  if (!problem.u) throw Error(ErrorCode::DimensionMismatch, "problem has no estimating function");
  const Index p = problem.u->dimension();
  if (p < 1) throw Error(ErrorCode::DimensionMismatch, "estimating function dimension must be >= 1");
  if (!(problem.lambda >= 0.0) || !std::isfinite(problem.lambda)) {
    throw Error(ErrorCode::InvalidLambda, "lambda must be finite and >= 0");
  }
  problem.penalty.validate();
  if (const GroupPartition* partition = problem.penalty.partition()) partition->require_covers(p);
  if (const auto* ind = std::get_if<BallIndicatorPenalty>(&problem.penalty.kind)) {
    if (ind->ball.norm() == BallNorm::Box && ind->ball.lower().size() != p) {
      throw Error(ErrorCode::DimensionMismatch, "box has " + std::to_string(ind->ball.lower().size()) +
                                                    " coordinates but p = " + std::to_string(p));
    }
  }
  return problem;
}

}  // namespace ree
