#pragma once

#include <cstdint>
#include <random>

#include "superhedge/market.hpp"
#include "superhedge/pwl.hpp"
#include "superhedge/recursion.hpp"

namespace superhedge {

/// A one-step pricing problem: the system at t, the step coefficients and
/// the state (phi_prev, S_prev) at t-1.
struct OneStepInstance {
  PayoffSystem system;
  double alpha = 0.0;
  double beta = 0.0;
  double kappa = 0.0;
  double phi_prev = 0.0;
  double S_prev = 100.0;
};

/// Nonnegative convex PWL on [0, inf) with up to `max_kinks` kinks in [40, 160].
ConvexPWL random_payoff(std::mt19937_64& rng, int max_kinks = 6);

/// Cost rate from {0, 0.005, 0.01, 0.05, 0.2}.
double random_kappa(std::mt19937_64& rng);

/// Random payoff taken through 0-2 backward steps, then random step
/// coefficients for which the step admits no immediate profit, with
/// phi_prev in [-2, 2] and S_prev in [50, 150].
OneStepInstance random_instance(std::mt19937_64& rng);

/// Random model with horizon in [1, max_steps] and alpha <= 1 <= beta.
MarketModel random_model(std::mt19937_64& rng, std::size_t max_steps = 4);

/// Daily series (Mon-Fri) whose Monday-Thursday ratios lie on the dyadic
/// grid 1 + k/1024 with |k| <= 32. Periodic weeks hit k = -32 or k = +32 at
/// one step so that every 52-week window spans the full ratio range; all
/// other ratios are strictly inside. Ratios are exact in floating point.
PriceSeries synthetic_series(std::size_t weeks, std::uint64_t seed);

}  // namespace superhedge
