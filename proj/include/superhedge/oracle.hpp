#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "superhedge/pwl.hpp"
#include "superhedge/recursion.hpp"

namespace superhedge {

/// Phi(x) = x - kappa |x + phi_prev| and Phi^(x) = -Phi(-x). Phi is
/// increasing with slopes 1 + kappa then 1 - kappa around -phi_prev.
struct DistortionMap {
  double kappa = 0.0;
  double phi_prev = 0.0;

  double phi(double x) const;
  double inverse(double y) const;
  double hat(double x) const;
};

/// Compact supports K^i = [m^i, M^i] = (1 + mu_i) [alpha S, beta S] and the
/// region bounds m^{1,+-} = m^1 / (1 +- kappa), M^{N,+-} = M^N / (1 +- kappa).
struct DualWorkspace {
  std::vector<double> m;
  std::vector<double> M;
  double m1_plus = 0.0;
  double m1_minus = 0.0;
  double MN_plus = 0.0;
  double MN_minus = 0.0;
};

DualWorkspace dual_workspace(const PayoffSystem& system, double alpha, double beta,
                             double kappa, double S_prev);

struct GridSpec {
  std::optional<std::pair<double, double>> range;  // automatic when empty
  double step = 1e-3;
  int rounds = 3;  // each refinement divides the step by 100
};

/// Minimises the one-step super-hedging cost over a grid of positions, with
/// the inner supremum taken over the endpoints of each support. Throws
/// NumericalError when the minimiser keeps escaping the range (a sign that
/// the step admits immediate profit).
double grid_price(const PayoffSystem& system, double phi_prev, double S_prev, double alpha,
                  double beta, double kappa, const GridSpec& grid = {});

/// Largest convex function below the piecewise-linear interpolation of
/// `points` (sorted by x) continued by rays of slope `left_slope` and
/// `right_slope`. Empty when no such function exists.
std::optional<ConvexPWL> lower_convex_envelope(std::span<const std::pair<double, double>> points,
                                               double left_slope, double right_slope);

/// -(f* o Phi^{-1})*(S_prev), where f* is the conjugate of the payoff system
/// restricted to its compact supports. Returns -inf when the step admits
/// immediate profit.
double dual_price(const PayoffSystem& system, double phi_prev, double S_prev, double alpha,
                  double beta, double kappa);

enum class BarphiRegion { Below, Lower, Upper, Above };
const char* to_string(BarphiRegion r);

BarphiRegion barphi_region(const DualWorkspace& ws, double x);

/// phi-bar at x (p_j, b_j taken at S_prev), region by region; the price at
/// S_prev equals barphi_price(..., S_prev). `force` selects the formula of
/// a given region inside the valid range, so that neighbouring formulas can
/// be compared at a shared boundary.
double barphi_price(const PayoffSystem& system, double phi_prev, double S_prev, double alpha,
                    double beta, double kappa, double x,
                    std::optional<BarphiRegion> force = std::nullopt);

}  // namespace superhedge
