#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "superhedge/market.hpp"
#include "superhedge/pwl.hpp"

namespace superhedge {

/// One term x -> ghat(x) - mu * phi_prev * x of a payoff system.
struct PayoffComponent {
  ConvexPWL ghat;
  double mu = 0.0;
};

/// g_t(phi_prev, x) = max_i (ghat_i(x) - mu_i * phi_prev * x), with mu_i
/// strictly increasing and 1 + mu_i > 0.
struct PayoffSystem {
  std::vector<PayoffComponent> components;
  std::size_t t = 0;

  static PayoffSystem terminal(ConvexPWL payoff, std::size_t horizon);

  std::size_t size() const { return components.size(); }
  std::vector<double> mus() const;

  /// Throws ValidationError when an invariant is broken.
  void validate() const;
};

/// max_i (ghat_i(S) - mu_i * phi_prev * S).
double evaluate_price(const PayoffSystem& system, double phi_prev, double S);

/// The 2N one-step constraint lines at spot S: for each component i the
/// value ghat_i(c * S) and the scaled bound c * (1 + mu_i), first with
/// c = alpha for every component, then with c = beta.
struct EndpointLine {
  double value;
  double a;
};
std::vector<EndpointLine> endpoint_lines(const PayoffSystem& system, double alpha, double beta,
                                         double S);

enum class CostCase { Large, Small, Violated };
const char* to_string(CostCase c);

struct AipStep {
  bool holds = false;
  CostCase cost_case = CostCase::Violated;
  double alpha1 = 0.0;  // alpha * (1 + smallest mu)
  double betaN = 0.0;   // beta * (1 + largest mu)
};

/// alpha^1 <= 1 + kappa and beta^N >= 1 - kappa. Large when alpha^1 > 1 - kappa,
/// Small otherwise (the boundary belongs to Small).
AipStep aip_check_step(const std::vector<double>& mus, double alpha, double beta, double kappa);
AipStep aip_check_step(const PayoffSystem& system, double alpha, double beta, double kappa);

struct BackwardOptions {
  double merge_tol = 1e-12;        // relative tolerance for equal mu
  std::size_t max_components = 512;
};

/// Minimal super-hedging price one step earlier, as a payoff system of the
/// same form. Throws AipViolation when the step admits immediate profit and
/// NumericalError when the component cap is exceeded.
PayoffSystem backward_step(const PayoffSystem& system, double alpha, double beta, double kappa,
                           const BackwardOptions& options = {});

/// The distortion coefficients produced by backward_step for given input
/// coefficients, without building the payoff functions.
std::vector<double> step_mus(const std::vector<double>& mus, double alpha, double beta,
                             double kappa, double merge_tol = 1e-12);

struct GammaSequence {
  /// gamma[t] is the set of mu values of the system at time t, t = 0..T;
  /// gamma[T] = {0}. Entries before a violating step are left empty.
  std::vector<std::vector<double>> gamma;
  std::vector<AipStep> steps;  // steps[t] describes the period t -> t+1
  bool holds = true;
  std::optional<std::size_t> failing_step;
};

GammaSequence gamma_recursion(const MarketModel& model);

struct MultiStepResult {
  std::vector<PayoffSystem> systems;  // systems[t], t = 0..T
  double p0 = 0.0;
};

/// Backward induction from the terminal payoff; p0 = g_0(0, S_0).
MultiStepResult price_multi_step(const ConvexPWL& terminal, const MarketModel& model,
                                 const BackwardOptions& options = {});

}  // namespace superhedge
