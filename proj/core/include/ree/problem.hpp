#pragma once

#include "ree/estimating.hpp"
#include "ree/types.hpp"

namespace ree {

/// One instance of 0 in U(beta) + lambda * dOmega(beta).
struct EstimatingProblem {
  EstimatingFunctionPtr u;
  PenaltySpec penalty;
  double lambda = 0.0;

  Index dimension() const { return u ? u->dimension() : 0; }
};

/// Returns the problem unchanged when every invariant holds, else throws Error.
///
/// Checks: U present with p >= 1, lambda finite and >= 0, penalty parameters,
/// and that any group partition covers exactly {0..p-1} (box bounds match p).
const EstimatingProblem& validate_problem(const EstimatingProblem& problem);

}  // namespace ree
