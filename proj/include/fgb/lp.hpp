#pragma once

#include <cstddef>
#include <vector>

#include "fgb/estimators.hpp"
#include "fgb/graph.hpp"

namespace fgb {

struct MaxMinSolution {
  Distribution s;
  /// Attained minimum coverage: min over i of the s-mass on actions observing i.
  double value;
  /// Coverage of every action under s.
  std::vector<double> certificate;
  std::size_t pivots = 0;
};

/// Solves max over the simplex of min_i (sum of s_j over j observing i).
///
/// Dense primal simplex on the dual packing problem of the fractional
/// covering form, whose slack basis is feasible. Pricing is Dantzig's rule,
/// falling back to Bland's rule during runs of degenerate pivots. The result
/// is checked against the dual bound. When the uniform distribution attains
/// the optimum it is returned instead of the pivot vertex.
///
/// Throws InvalidParameter unless tol is in (0, 1e-3], and SolverFailure if
/// the pivot budget is exhausted or the optimality gap exceeds tol.
MaxMinSolution solve_maxmin_coverage(const FeedbackGraph& g, double tol = 1e-9);

}  // namespace fgb
