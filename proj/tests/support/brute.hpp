#pragma once

#include "superhedge/pwl.hpp"
#include "superhedge/recursion.hpp"

namespace superhedge::testing {

/// Exact one-step price by enumerating every crossing of the 4N constraint
/// lines in phi (plus phi_prev) and evaluating the cost directly.
double brute_one_step_price(const PayoffSystem& system, double phi_prev, double S, double alpha,
                            double beta, double kappa);

/// Minimiser of the same cost found by the enumeration above.
double brute_one_step_argmin(const PayoffSystem& system, double phi_prev, double S, double alpha,
                             double beta, double kappa);

/// min over [lower, upper] of max_j lines_j on a grid: coarse scan at
/// `coarse` over a bracket around all pairwise crossings, then a scan at
/// `fine` around the coarse minimiser.
double grid_min_max(const MaxAffineFamily& family, double coarse = 1e-3, double fine = 1e-5);

}  // namespace superhedge::testing
