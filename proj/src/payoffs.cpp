#include "superhedge/payoffs.hpp"

#include <cmath>

#include "superhedge/errors.hpp"

namespace superhedge::payoffs {

ConvexPWL call(double strike) {
  if (!(strike >= 0.0) || !std::isfinite(strike)) throw ValidationError("call: strike must be >= 0");
  const AffineLine lines[] = {{0.0, 0.0}, {1.0, -strike}};
  return ConvexPWL::max_of_lines(lines, 0.0, kInf);
}

ConvexPWL put(double strike) {
  if (!(strike >= 0.0) || !std::isfinite(strike)) throw ValidationError("put: strike must be >= 0");
  const AffineLine lines[] = {{-1.0, strike}, {0.0, 0.0}};
  return ConvexPWL::max_of_lines(lines, 0.0, kInf);
}

ConvexPWL zero() { return ConvexPWL::constant(0.0, 0.0, kInf); }

ConvexPWL from_points(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw ValidationError("payoff needs at least two points");
  std::vector<double> breaks;
  std::vector<AffineLine> lines;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    auto [x0, y0] = points[k];
    auto [x1, y1] = points[k + 1];
    if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(x1) || !std::isfinite(y1)) {
      throw ValidationError("payoff points must be finite");
    }
    if (!(x1 > x0)) throw ValidationError("payoff points must have strictly increasing x");
    double slope = (y1 - y0) / (x1 - x0);
    if (k > 0) breaks.push_back(x0);
    lines.push_back({slope, y0 - slope * x0});
  }
  if (points.front().first < 0.0) throw ValidationError("payoff points must have x >= 0");
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].slope < lines[k - 1].slope - 1e-12) {
      throw ValidationError("payoff is not convex");
    }
  }
  // Drop breakpoints at zero: they are not interior to [0, inf).
  while (!breaks.empty() && breaks.front() <= 0.0) {
    breaks.erase(breaks.begin());
    lines.erase(lines.begin());
  }
  return ConvexPWL::from_pieces(0.0, kInf, std::move(breaks), std::move(lines));
}

}  // namespace superhedge::payoffs
