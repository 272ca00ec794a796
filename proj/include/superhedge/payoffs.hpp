#pragma once

#include <utility>
#include <vector>

#include "superhedge/pwl.hpp"

namespace superhedge::payoffs {

// Terminal payoffs live on [0, inf).

ConvexPWL call(double strike);
ConvexPWL put(double strike);
ConvexPWL zero();

/// Linear interpolation through (x, y) points sorted by x, extended
/// linearly beyond the first and last point. Throws ValidationError when the
/// result is not convex or the points are not strictly increasing in x.
ConvexPWL from_points(const std::vector<std::pair<double, double>>& points);

}  // namespace superhedge::payoffs
