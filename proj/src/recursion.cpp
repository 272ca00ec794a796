#include "superhedge/recursion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "superhedge/errors.hpp"

namespace superhedge {

PayoffSystem PayoffSystem::terminal(ConvexPWL payoff, std::size_t horizon) {
  PayoffSystem s;
  s.components.push_back({std::move(payoff), 0.0});
  s.t = horizon;
  return s;
}

std::vector<double> PayoffSystem::mus() const {
  std::vector<double> out;
  out.reserve(components.size());
  for (const auto& c : components) out.push_back(c.mu);
  return out;
}

void PayoffSystem::validate() const {
  if (components.empty()) throw ValidationError("payoff system has no components");
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto& c = components[i];
    if (!(1.0 + c.mu > 0.0)) throw ValidationError("component mu must exceed -1");
    if (i > 0 && !(c.mu > components[i - 1].mu)) {
      throw ValidationError("component mu values must be strictly increasing");
    }
    if (!c.ghat.is_valid()) throw ValidationError("component function is not convex PWL");
  }
}

double evaluate_price(const PayoffSystem& system, double phi_prev, double S) {
  double best = -kInf;
  for (const auto& c : system.components) {
    best = std::max(best, c.ghat(S) - c.mu * phi_prev * S);
  }
  return best;
}

std::vector<EndpointLine> endpoint_lines(const PayoffSystem& system, double alpha, double beta,
                                         double S) {
  std::vector<EndpointLine> out;
  out.reserve(2 * system.size());
  for (double c : {alpha, beta}) {
    for (const auto& comp : system.components) {
      out.push_back({comp.ghat(c * S), c * (1.0 + comp.mu)});
    }
  }
  return out;
}

const char* to_string(CostCase c) {
  switch (c) {
    case CostCase::Large: return "large";
    case CostCase::Small: return "small";
    case CostCase::Violated: return "violated";
  }
  return "?";
}

AipStep aip_check_step(const std::vector<double>& mus, double alpha, double beta, double kappa) {
  AipStep r;
  if (mus.empty()) return r;
  auto [lo, hi] = std::minmax_element(mus.begin(), mus.end());
  r.alpha1 = alpha * (1.0 + *lo);
  r.betaN = beta * (1.0 + *hi);
  r.holds = r.alpha1 <= 1.0 + kappa && r.betaN >= 1.0 - kappa;
  if (!r.holds) {
    r.cost_case = CostCase::Violated;
  } else {
    r.cost_case = r.alpha1 > 1.0 - kappa ? CostCase::Large : CostCase::Small;
  }
  return r;
}

AipStep aip_check_step(const PayoffSystem& system, double alpha, double beta, double kappa) {
  return aip_check_step(system.mus(), alpha, beta, kappa);
}

namespace {

void check_step_args(double alpha, double beta, double kappa) {
  if (!(alpha >= 0.0) || !(alpha < beta) || !std::isfinite(beta)) {
    throw ValidationError("need 0 <= alpha < beta");
  }
  if (!(kappa >= 0.0 && kappa < 1.0)) throw ValidationError("kappa must lie in [0,1)");
}

// x -> f(c x); c = 0 gives the constant f(0).
ConvexPWL scaled(const ConvexPWL& f, double c) {
  if (c > 0.0) return scale_arg(f, c);
  double v = f(0.0);
  if (!std::isfinite(v)) throw ValidationError("payoff undefined at 0 with alpha = 0");
  return ConvexPWL::constant(v);
}

// Which of the endpoint lines feed each output component. Shared by the
// function-level and the coefficient-only versions of the step.
struct StepPlan {
  struct Pair {
    std::size_t i, j;
    double lambda;
  };
  struct Side {
    bool present = false;
    std::vector<Pair> pairs;           // lambda * g_i + (1 - lambda) * g_j
    std::vector<std::size_t> flat;     // used when no line rises
  };
  std::vector<std::size_t> no_trade;   // mu = a_k - 1
  Side buy;                            // mu = +kappa
  Side sell;                           // mu = -kappa
};

StepPlan plan_step(const std::vector<double>& a, double kappa) {
  StepPlan plan;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] >= 1.0 - kappa && a[k] <= 1.0 + kappa) plan.no_trade.push_back(k);
  }
  // Lines phi -> y_k + S (1 - a_k + r kappa) phi for trade direction r; the
  // infimum of their maximum is the max over crossing values of a falling
  // (or flat) line with a rising one.
  auto side = [&](double r) {
    StepPlan::Side out;
    std::vector<std::size_t> nonpos, pos;
    std::vector<double> s(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      s[k] = 1.0 - a[k] + r * kappa;
      (s[k] <= 0.0 ? nonpos : pos).push_back(k);
    }
    if (pos.empty()) {
      for (auto k : nonpos) {
        if (s[k] == 0.0) out.flat.push_back(k);
      }
      out.present = !out.flat.empty();
      return out;
    }
    for (auto i : nonpos) {
      for (auto j : pos) out.pairs.push_back({i, j, s[j] / (s[j] - s[i])});
    }
    out.present = !out.pairs.empty();
    return out;
  };
  plan.buy = side(1.0);
  plan.sell = side(-1.0);
  return plan;
}

std::vector<double> scaled_bounds(const std::vector<double>& mus, double alpha, double beta) {
  std::vector<double> a;
  a.reserve(2 * mus.size());
  for (double c : {alpha, beta}) {
    for (double mu : mus) a.push_back(c * (1.0 + mu));
  }
  return a;
}

template <typename T, typename Merge>
std::vector<std::pair<double, T>> sort_and_merge(std::vector<std::pair<double, T>> items,
                                                 double tol, Merge&& merge) {
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<std::pair<double, T>> out;
  for (auto& it : items) {
    if (!out.empty() &&
        std::abs(it.first - out.back().first) <= tol * std::max(1.0, std::abs(it.first))) {
      merge(out.back().second, it.second);
    } else {
      out.push_back(std::move(it));
    }
  }
  return out;
}

}  // namespace

std::vector<double> step_mus(const std::vector<double>& mus, double alpha, double beta,
                             double kappa, double merge_tol) {
  check_step_args(alpha, beta, kappa);
  auto a = scaled_bounds(mus, alpha, beta);
  StepPlan plan = plan_step(a, kappa);
  std::vector<std::pair<double, int>> items;
  for (auto k : plan.no_trade) items.push_back({a[k] - 1.0, 0});
  if (plan.buy.present) items.push_back({kappa, 0});
  if (plan.sell.present) items.push_back({-kappa, 0});
  auto merged = sort_and_merge(std::move(items), merge_tol, [](int&, int&) {});
  std::vector<double> out;
  for (const auto& m : merged) out.push_back(m.first);
  return out;
}

PayoffSystem backward_step(const PayoffSystem& system, double alpha, double beta, double kappa,
                           const BackwardOptions& options) {
  check_step_args(alpha, beta, kappa);
  system.validate();
  auto aip = aip_check_step(system, alpha, beta, kappa);
  std::size_t step = system.t == 0 ? 0 : system.t - 1;
  if (!aip.holds) {
    throw AipViolation(step, "immediate profit at step " + std::to_string(step) +
                                 ": alpha^1 = " + std::to_string(aip.alpha1) +
                                 ", beta^N = " + std::to_string(aip.betaN) +
                                 ", kappa = " + std::to_string(kappa));
  }

  const std::size_t n = system.size();
  std::vector<ConvexPWL> tilde;
  tilde.reserve(2 * n);
  for (double c : {alpha, beta}) {
    for (const auto& comp : system.components) tilde.push_back(scaled(comp.ghat, c));
  }
  auto a = scaled_bounds(system.mus(), alpha, beta);
  StepPlan plan = plan_step(a, kappa);

  auto build_side = [&](const StepPlan::Side& side) {
    std::optional<ConvexPWL> acc;
    auto add = [&](ConvexPWL f) { acc = acc ? pointwise_max(*acc, f) : std::move(f); };
    if (side.pairs.empty()) {
      for (auto k : side.flat) add(tilde[k]);
    } else {
      for (const auto& pr : side.pairs) add(convex_combine(pr.lambda, tilde[pr.i], tilde[pr.j]));
    }
    return *acc;
  };

  std::vector<std::pair<double, ConvexPWL>> items;
  for (auto k : plan.no_trade) items.push_back({a[k] - 1.0, tilde[k]});
  if (plan.buy.present) items.push_back({kappa, build_side(plan.buy)});
  if (plan.sell.present) items.push_back({-kappa, build_side(plan.sell)});
  auto merged = sort_and_merge(std::move(items), options.merge_tol,
                               [](ConvexPWL& into, ConvexPWL& from) {
                                 into = pointwise_max(into, from);
                               });

  PayoffSystem out;
  out.t = step;
  for (auto& [mu, g] : merged) out.components.push_back({std::move(g), mu});
  if (out.components.size() > options.max_components) {
    throw NumericalError("payoff system at step " + std::to_string(step) + " has " +
                         std::to_string(out.components.size()) + " components (cap " +
                         std::to_string(options.max_components) + ")");
  }
  return out;
}

GammaSequence gamma_recursion(const MarketModel& model) {
  model.validate();
  const std::size_t T = model.horizon();
  GammaSequence g;
  g.gamma.assign(T + 1, {});
  g.steps.assign(T, AipStep{});
  g.gamma[T] = {0.0};
  for (std::size_t t = T; t-- > 0;) {
    const auto& next = g.gamma[t + 1];
    g.steps[t] = aip_check_step(next, model.alpha[t], model.beta[t], model.kappa[t]);
    if (!g.steps[t].holds) {
      g.holds = false;
      g.failing_step = t;
      break;
    }
    g.gamma[t] = step_mus(next, model.alpha[t], model.beta[t], model.kappa[t]);
  }
  return g;
}

MultiStepResult price_multi_step(const ConvexPWL& terminal, const MarketModel& model,
                                 const BackwardOptions& options) {
  model.validate();
  const std::size_t T = model.horizon();
  MultiStepResult r;
  r.systems.resize(T + 1);
  r.systems[T] = PayoffSystem::terminal(terminal, T);
  for (std::size_t t = T; t-- > 0;) {
    r.systems[t] =
        backward_step(r.systems[t + 1], model.alpha[t], model.beta[t], model.kappa[t], options);
  }
  r.p0 = evaluate_price(r.systems[0], 0.0, model.spot);
  return r;
}

}  // namespace superhedge
