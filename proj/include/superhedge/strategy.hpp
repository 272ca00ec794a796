#pragma once

#include <cstddef>
#include <vector>

#include "superhedge/market.hpp"
#include "superhedge/pwl.hpp"
#include "superhedge/recursion.hpp"

namespace superhedge {

/// a(v) = max_j (b_j - p_j v): the smallest position keeping every
/// constraint line within v of the first (lowest-bound) one.
///
/// Lines whose scaled bound equals the lowest one (only possible when
/// alpha = 0) cannot be written this way; they are left out and their
/// requirement v >= g~^j(S) - g~^1(S) is kept in `v0`.
struct DeltaLines {
  std::vector<double> p;  // nondecreasing, all > 0
  std::vector<double> b;
  double v0 = 0.0;

  /// -inf when there are no lines.
  double operator()(double v) const;
};

DeltaLines delta_lines(const PayoffSystem& system, double alpha, double beta, double S_prev);

/// Lines v -> d + s v whose maximum, minimised over v >= v0, yields the
/// one-step price relative to `base`:
///   Large: price = base + min A, with base = g~^1(S) - kappa phi_prev S,
///   Small: price = base + min A, with base = g~^1(S).
struct CandidateLines {
  CostCase cost_case = CostCase::Small;
  std::vector<AffineLine> lines;
  double v0 = 0.0;
  double base = 0.0;
};

/// Builds the candidate lines for a forced regime. The Large formulas need
/// alpha^1 >= 1 - kappa and the Small ones alpha^1 <= 1 - kappa; at the
/// boundary both are valid.
CandidateLines candidate_lines(const PayoffSystem& system, const DeltaLines& delta,
                               double phi_prev, double S_prev, double alpha, double beta,
                               double kappa, CostCase regime);

/// One-step price computed through the candidate lines of `regime`.
double regime_price(const PayoffSystem& system, double phi_prev, double S_prev, double alpha,
                    double beta, double kappa, CostCase regime);

/// max over constraint lines of the wealth needed at t-1 when holding phi:
/// max_k (y_k + S (1 - a_k) phi) + kappa S |phi - phi_prev|.
double one_step_cost(const PayoffSystem& system, double phi, double phi_prev, double S_prev,
                     double alpha, double beta, double kappa);

struct HedgeDecision {
  enum class Route {
    Candidates,  // v* picked from the lower bound and pairwise crossings of the candidate lines
    MinMax,      // v* from the closed-form minimiser over v >= v0
    Direct,      // phi from the closed-form minimiser of the one-step cost
  };

  double phi_opt = 0.0;
  double v_star = 0.0;
  CostCase cost_case = CostCase::Small;
  Route route = Route::Candidates;
  std::size_t candidates = 0;
  double residual = 0.0;  // |A(v*) - target|
};

const char* to_string(HedgeDecision::Route r);

/// Optimal position at t-1 for the payoff `system` (at time t), given the
/// previous position, the current spot and the price at (phi_prev, S_prev).
/// Throws AipViolation when the step admits immediate profit.
HedgeDecision optimal_strategy(const PayoffSystem& system, double phi_prev, double S_prev,
                               double alpha, double beta, double kappa, double price_prev);

struct PortfolioState {
  double V = 0.0;
  double phi = 0.0;
};

/// Self-financing rebalance at S_prev to phi_new, then mark to S_new.
PortfolioState step_portfolio(PortfolioState state, double phi_new, double S_prev, double S_new,
                              double kappa);

struct HedgeEpisode {
  std::size_t week = 0;
  double strike = 0.0;
  double kappa = 0.0;
  std::vector<double> path;   // S_0..S_T
  double V0 = 0.0;
  std::vector<double> phi;    // phi_0..phi_{T-1}
  std::vector<double> V;      // V_0..V_T
  double VT = 0.0;
  double payoff = 0.0;        // g_T(S_T)
  double error = 0.0;         // (V_T - g_T(S_T)) / S_0
  std::vector<HedgeDecision> decisions;
};

/// Prices the payoff, then runs the optimal self-financing strategy along
/// `path` starting from V_0 = p0 and phi_{-1} = 0.
HedgeEpisode simulate_hedge(const ConvexPWL& terminal, const MarketModel& model,
                            const PricePath& path);

/// Same, reusing systems from price_multi_step.
HedgeEpisode simulate_hedge(const MultiStepResult& priced, const ConvexPWL& terminal,
                            const MarketModel& model, const PricePath& path);

}  // namespace superhedge
