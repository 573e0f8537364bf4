#pragma once

#include "ree/types.hpp"

// Brute-force reference solvers. Nothing here calls into penalties or
// solvers; they exist to check those modules independently.

namespace ree::oracle {

/// Cyclic coordinate descent on 1/2 ||y - X beta||^2 + lambda ||beta||_1.
/// Stops once the largest coordinate change in a sweep is <= tol. p <= 50.
Vector lasso_cd(const Matrix& x, const Vector& y, double lambda, double tol, int max_sweeps = 1000000);

/// Grid minimiser of 1/2 ||z - v||^2 + scale * Omega(z) over the lattice
/// grid_step * Z^p restricted to [-grid_halfwidth, grid_halfwidth]^p.
///
/// The lattice is searched coarse to fine: the first level scans the whole
/// box, each later level scans +-kRefineWindow points around the previous
/// best at a step kRefineFactor times smaller, ending at grid_step. A level
/// whose best point lands on its window boundary is re-centred and rescanned.
/// Dimension of v must be <= 3.
Vector grid_prox(const PenaltySpec& spec, const Vector& v, double scale, double grid_halfwidth,
                 double grid_step);

inline constexpr int kRefineFactor = 4;
inline constexpr int kRefineWindow = 12;

/// Omega(z) evaluated directly from the definition. Infinity off an indicator's set.
double penalty_by_definition(const PenaltySpec& spec, const Vector& z);

}  // namespace ree::oracle
