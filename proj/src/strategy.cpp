#include "superhedge/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "superhedge/errors.hpp"

namespace superhedge {

double DeltaLines::operator()(double v) const {
  double best = -kInf;
  for (std::size_t j = 0; j < p.size(); ++j) best = std::max(best, b[j] - p[j] * v);
  return best;
}

DeltaLines delta_lines(const PayoffSystem& system, double alpha, double beta, double S_prev) {
  if (!(S_prev > 0.0)) throw ValidationError("spot must be > 0");
  auto lines = endpoint_lines(system, alpha, beta, S_prev);
  const double a1 = lines.front().a;
  const double y1 = lines.front().value;
  DeltaLines out;
  std::vector<std::pair<double, double>> pb;
  for (std::size_t j = 1; j < lines.size(); ++j) {
    if (lines[j].a == a1) {
      out.v0 = std::max(out.v0, lines[j].value - y1);
      continue;
    }
    double p = 1.0 / ((lines[j].a - a1) * S_prev);
    pb.emplace_back(p, (lines[j].value - y1) * p);
  }
  std::sort(pb.begin(), pb.end());
  for (auto [p, b] : pb) {
    out.p.push_back(p);
    out.b.push_back(b);
  }
  return out;
}

CandidateLines candidate_lines(const PayoffSystem& system, const DeltaLines& delta,
                               double phi_prev, double S_prev, double alpha, double beta,
                               double kappa, CostCase regime) {
  auto aip = aip_check_step(system, alpha, beta, kappa);
  const double a1 = aip.alpha1;
  const double y1 = system.components.front().ghat(alpha * S_prev);
  CandidateLines out;
  out.cost_case = regime;
  out.v0 = delta.v0;
  if (regime == CostCase::Large) {
    const double rho = 1.0 - a1 + kappa;
    out.base = y1 - kappa * phi_prev * S_prev;
    out.lines.push_back({1.0, rho * S_prev * phi_prev});
    for (std::size_t j = 0; j < delta.p.size(); ++j) {
      out.lines.push_back({1.0 - rho * S_prev * delta.p[j], rho * S_prev * delta.b[j]});
    }
  } else if (regime == CostCase::Small) {
    out.base = y1;
    for (double r : {1.0, -1.0}) {
      const double eta = 1.0 - a1 + r * kappa;
      for (std::size_t j = 0; j < delta.p.size(); ++j) {
        out.lines.push_back({1.0 - eta * S_prev * delta.p[j],
                             eta * S_prev * delta.b[j] - r * kappa * phi_prev * S_prev});
      }
    }
  } else {
    throw ValidationError("candidate lines need a Large or Small regime");
  }
  return out;
}

namespace {

double max_line(const std::vector<AffineLine>& lines, double v) {
  double best = -kInf;
  for (const auto& l : lines) best = std::max(best, l(v));
  return best;
}

double regime_min(const CandidateLines& cl) {
  return min_max_affine({cl.lines, cl.v0, kInf}).value;
}

}  // namespace

double regime_price(const PayoffSystem& system, double phi_prev, double S_prev, double alpha,
                    double beta, double kappa, CostCase regime) {
  auto delta = delta_lines(system, alpha, beta, S_prev);
  auto cl = candidate_lines(system, delta, phi_prev, S_prev, alpha, beta, kappa, regime);
  return cl.base + regime_min(cl);
}

double one_step_cost(const PayoffSystem& system, double phi, double phi_prev, double S_prev,
                     double alpha, double beta, double kappa) {
  double worst = -kInf;
  for (const auto& l : endpoint_lines(system, alpha, beta, S_prev)) {
    worst = std::max(worst, l.value + S_prev * (1.0 - l.a) * phi);
  }
  return worst + kappa * S_prev * std::abs(phi - phi_prev);
}

const char* to_string(HedgeDecision::Route r) {
  switch (r) {
    case HedgeDecision::Route::Candidates: return "candidates";
    case HedgeDecision::Route::MinMax: return "minmax";
    case HedgeDecision::Route::Direct: return "direct";
  }
  return "?";
}

HedgeDecision optimal_strategy(const PayoffSystem& system, double phi_prev, double S_prev,
                               double alpha, double beta, double kappa, double price_prev) {
  auto aip = aip_check_step(system, alpha, beta, kappa);
  if (!aip.holds) {
    std::size_t step = system.t == 0 ? 0 : system.t - 1;
    throw AipViolation(step, "immediate profit at step " + std::to_string(step));
  }
  HedgeDecision d;
  d.cost_case = aip.cost_case;
  const bool large = d.cost_case == CostCase::Large;
  const double tol = 1e-9 * std::max(1.0, std::abs(price_prev));

  auto delta = delta_lines(system, alpha, beta, S_prev);
  auto cl = candidate_lines(system, delta, phi_prev, S_prev, alpha, beta, kappa, d.cost_case);
  const double target = price_prev - cl.base;
  auto A = [&](double v) { return max_line(cl.lines, v); };
  auto phi_of = [&](double v) { return large ? std::max(delta(v), phi_prev) : delta(v); };
  auto optimal = [&](double phi) {
    return one_step_cost(system, phi, phi_prev, S_prev, alpha, beta, kappa) <= price_prev + tol;
  };

  // The lower bound and every pairwise crossing above it.
  std::vector<double> cands{cl.v0};
  for (std::size_t i = 0; i < cl.lines.size(); ++i) {
    for (std::size_t j = i + 1; j < cl.lines.size(); ++j) {
      const auto& li = cl.lines[i];
      const auto& lj = cl.lines[j];
      if (li.slope == lj.slope) continue;
      double e = (li.intercept - lj.intercept) / (lj.slope - li.slope);
      if (e >= cl.v0) cands.push_back(e);
    }
  }
  d.candidates = cands.size();
  {
    double best_gap = kInf, best = kInf;
    for (double e : cands) {
      double gap = std::abs(A(e) - target);
      double tie = 1e-12 * std::max(1.0, std::abs(target));
      if (gap < best_gap - tie || (std::abs(gap - best_gap) <= tie && e < best)) {
        best_gap = std::min(gap, best_gap);
        best = e;
      }
    }
    d.v_star = best;
    d.residual = std::abs(A(d.v_star) - target);
    d.phi_opt = phi_of(d.v_star);
    d.route = HedgeDecision::Route::Candidates;
    if (d.residual <= tol && optimal(d.phi_opt)) return d;
  }

  auto mm = min_max_affine({cl.lines, cl.v0, kInf});
  if (std::isfinite(mm.argmin)) {
    d.v_star = mm.argmin;
    d.residual = std::abs(A(d.v_star) - target);
    d.phi_opt = phi_of(d.v_star);
    d.route = HedgeDecision::Route::MinMax;
    if (optimal(d.phi_opt)) return d;
  }

  // Minimise the one-step cost over phi directly: its lines are
  // y_k - r kappa phi_prev S + S (1 - a_k + r kappa) phi for r = +1, -1.
  std::vector<AffineLine> lines;
  for (const auto& l : endpoint_lines(system, alpha, beta, S_prev)) {
    for (double r : {1.0, -1.0}) {
      lines.push_back({S_prev * (1.0 - l.a + r * kappa), l.value - r * kappa * phi_prev * S_prev});
    }
  }
  auto direct = min_max_affine({lines, -kInf, kInf});
  if (!std::isfinite(direct.argmin)) {
    throw NumericalError("one-step cost has no finite minimiser");
  }
  d.phi_opt = large ? std::max(direct.argmin, phi_prev) : direct.argmin;
  d.route = HedgeDecision::Route::Direct;
  return d;
}

PortfolioState step_portfolio(PortfolioState state, double phi_new, double S_prev, double S_new,
                              double kappa) {
  if (!(S_prev > 0.0) || !(S_new > 0.0)) throw ValidationError("prices must be > 0");
  PortfolioState next;
  next.V = state.V + phi_new * (S_new - S_prev) - kappa * std::abs(phi_new - state.phi) * S_prev;
  next.phi = phi_new;
  return next;
}

HedgeEpisode simulate_hedge(const ConvexPWL& terminal, const MarketModel& model,
                            const PricePath& path) {
  return simulate_hedge(price_multi_step(terminal, model), terminal, model, path);
}

HedgeEpisode simulate_hedge(const MultiStepResult& priced, const ConvexPWL& terminal,
                            const MarketModel& model, const PricePath& path) {
  const std::size_t T = model.horizon();
  if (path.S.size() != T + 1) {
    throw ValidationError("price path must have horizon + 1 points");
  }
  if (path.S.front() != model.spot) throw ValidationError("path must start at the model spot");
  HedgeEpisode ep;
  ep.kappa = model.kappa.front();
  ep.path = path.S;
  ep.V0 = priced.p0;
  PortfolioState state{priced.p0, 0.0};
  ep.V.push_back(state.V);
  for (std::size_t t = 0; t < T; ++t) {
    double S = path.S[t];
    double price = evaluate_price(priced.systems[t], state.phi, S);
    auto d = optimal_strategy(priced.systems[t + 1], state.phi, S, model.alpha[t], model.beta[t],
                              model.kappa[t], price);
    state = step_portfolio(state, d.phi_opt, S, path.S[t + 1], model.kappa[t]);
    ep.phi.push_back(d.phi_opt);
    ep.V.push_back(state.V);
    ep.decisions.push_back(d);
  }
  ep.VT = state.V;
  ep.payoff = terminal(path.S.back());
  ep.error = (ep.VT - ep.payoff) / path.S.front();
  return ep;
}

}  // namespace superhedge
