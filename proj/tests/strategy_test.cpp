#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "superhedge/errors.hpp"
#include "superhedge/instances.hpp"
#include "superhedge/payoffs.hpp"
#include "superhedge/strategy.hpp"
#include "support/brute.hpp"

namespace superhedge {
namespace {

PayoffSystem call_terminal(double K = 100) { return PayoffSystem::terminal(payoffs::call(K), 1); }

double one_step_price(const PayoffSystem& s, double phi, double S, double a, double b, double k) {
  return evaluate_price(backward_step(s, a, b, k), phi, S);
}

TEST(DeltaLines, SingleCall) {
  auto d = delta_lines(call_terminal(), 0.9, 1.2, 100.0);
  ASSERT_EQ(d.p.size(), 1u);
  EXPECT_NEAR(d.p[0], 1.0 / 30.0, 1e-15);
  EXPECT_NEAR(d.b[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(d(0.0), 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(d.v0, 0.0);
}

TEST(DeltaLines, ZeroPayoff) {
  auto s = backward_step(PayoffSystem::terminal(payoffs::zero(), 2), 0.9, 1.1, 0.01);
  auto d = delta_lines(s, 0.95, 1.05, 100.0);
  for (double b : d.b) EXPECT_DOUBLE_EQ(b, 0.0);
  for (double v : {0.0, 1.0, 10.0}) EXPECT_LE(d(v), 0.0);
}

TEST(DeltaLines, AlphaZeroLinesBecomeFloor) {
  // With alpha = 0 every lower scaled bound equals alpha^1 = 0.
  PayoffSystem s;
  s.components = {{payoffs::call(100), -0.01}, {ConvexPWL::constant(3.0, 0.0, kInf), 0.01}};
  auto d = delta_lines(s, 0.0, 1.2, 100.0);
  EXPECT_EQ(d.p.size(), 2u);
  EXPECT_DOUBLE_EQ(d.v0, 3.0);
}

TEST(DeltaLines, StrictlyDecreasing) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> v(-50.0, 50.0);
  for (int trial = 0; trial < 1000; ++trial) {
    auto in = random_instance(rng);
    auto d = delta_lines(in.system, in.alpha, in.beta, in.S_prev);
    ASSERT_FALSE(d.p.empty());
    for (std::size_t j = 1; j < d.p.size(); ++j) ASSERT_LE(d.p[j - 1], d.p[j]);
    double v1 = v(rng), v2 = v(rng);
    if (v1 > v2) std::swap(v1, v2);
    if (v1 == v2) continue;
    EXPECT_GT(d(v1), d(v2));
  }
}

TEST(OptimalStrategy, CaseSmallCall) {
  auto s = call_terminal();
  double price = one_step_price(s, 0.0, 100.0, 0.9, 1.2, 0.01);
  auto d = optimal_strategy(s, 0.0, 100.0, 0.9, 1.2, 0.01, price);
  EXPECT_EQ(d.cost_case, CostCase::Small);
  EXPECT_NEAR(d.phi_opt, 2.0 / 3.0, 1e-9);
  EXPECT_EQ(d.route, HedgeDecision::Route::Candidates);
}

TEST(OptimalStrategy, CaseLargeCall) {
  auto s = call_terminal();
  double price = one_step_price(s, 0.0, 100.0, 0.99, 1.1, 0.02);
  auto d = optimal_strategy(s, 0.0, 100.0, 0.99, 1.1, 0.02, price);
  EXPECT_EQ(d.cost_case, CostCase::Large);
  EXPECT_NEAR(d.phi_opt, 10.0 / 11.0, 1e-9);
  EXPECT_EQ(d.route, HedgeDecision::Route::Candidates);
}

TEST(OptimalStrategy, ZeroPayoff) {
  auto s = PayoffSystem::terminal(payoffs::zero(), 1);
  auto d = optimal_strategy(s, 0.0, 100.0, 0.9, 1.2, 0.01, 0.0);
  EXPECT_NEAR(d.phi_opt, 0.0, 1e-12);
}

TEST(OptimalStrategy, AttainsThePriceOnRandomInstances) {
  std::mt19937_64 rng(67);
  int candidates = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto in = random_instance(rng);
    double price = one_step_price(in.system, in.phi_prev, in.S_prev, in.alpha, in.beta, in.kappa);
    auto d = optimal_strategy(in.system, in.phi_prev, in.S_prev, in.alpha, in.beta, in.kappa, price);
    double cost = one_step_cost(in.system, d.phi_opt, in.phi_prev, in.S_prev, in.alpha, in.beta,
                                in.kappa);
    EXPECT_LE(cost, price + 1e-9 * std::max(1.0, std::abs(price))) << trial;
    if (d.cost_case == CostCase::Large) EXPECT_GE(d.phi_opt, in.phi_prev);
    if (d.route == HedgeDecision::Route::Candidates) ++candidates;
  }
  // The pairwise-crossing route settles nearly every instance.
  EXPECT_GT(candidates, 450);
}

TEST(RegimePrice, BothFormulasAgreeOnTheBoundary) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto in = random_instance(rng);
    if (in.kappa == 0.0) in.kappa = 0.05;
    // alpha (1 + mu_1) = 1 - kappa
    in.alpha = (1.0 - in.kappa) / (1.0 + in.system.components.front().mu);
    in.beta = std::max(in.beta, in.alpha + 0.05 + 0.2 * u(rng));
    double large = regime_price(in.system, in.phi_prev, in.S_prev, in.alpha, in.beta, in.kappa,
                                CostCase::Large);
    double small = regime_price(in.system, in.phi_prev, in.S_prev, in.alpha, in.beta, in.kappa,
                                CostCase::Small);
    double closed = one_step_price(in.system, in.phi_prev, in.S_prev, in.alpha, in.beta, in.kappa);
    EXPECT_NEAR(large, small, 1e-9 * std::max(1.0, std::abs(small)));
    EXPECT_NEAR(small, closed, 1e-9 * std::max(1.0, std::abs(small)));
  }
}

TEST(RegimePrice, MatchesClosedFormInsideEachRegime) {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 300; ++trial) {
    auto in = random_instance(rng);
    auto aip = aip_check_step(in.system, in.alpha, in.beta, in.kappa);
    double rp = regime_price(in.system, in.phi_prev, in.S_prev, in.alpha, in.beta, in.kappa,
                             aip.cost_case);
    double closed = one_step_price(in.system, in.phi_prev, in.S_prev, in.alpha, in.beta, in.kappa);
    EXPECT_NEAR(rp, closed, 1e-9 * std::max(1.0, std::abs(closed)));
  }
}

TEST(StepPortfolio, Examples) {
  auto s = step_portfolio({5.0, 2.0}, 2.0, 100.0, 103.0, 0.01);
  EXPECT_DOUBLE_EQ(s.V, 11.0);
  s = step_portfolio({5.0, 2.0}, 3.0, 100.0, 100.0, 0.01);
  EXPECT_DOUBLE_EQ(s.V, 4.0);
  s = step_portfolio({22.0 / 3.0, 0.0}, 2.0 / 3.0, 100.0, 120.0, 0.01);
  EXPECT_NEAR(s.V, 20.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.phi, 2.0 / 3.0);
}

TEST(StepPortfolio, BuyAndHold) {
  std::vector<double> path{100, 103, 99.5, 101, 107};
  PortfolioState st{10.0, 1.5};
  for (std::size_t t = 1; t < path.size(); ++t) st = step_portfolio(st, 1.5, path[t - 1], path[t], 0.02);
  EXPECT_DOUBLE_EQ(st.V, 10.0 + 1.5 * (107.0 - 100.0));
}

TEST(SimulateHedge, CaseSmallEndToEnd) {
  auto m = MarketModel::uniform(100, 0.9, 1.2, 0.01, 1);
  auto up = simulate_hedge(payoffs::call(100), m, PricePath{{100, 120}});
  EXPECT_NEAR(up.V0, 22.0 / 3.0, 1e-9);
  EXPECT_NEAR(up.VT, 20.0, 1e-9);
  EXPECT_NEAR(up.error, 0.0, 1e-11);
  auto down = simulate_hedge(payoffs::call(100), m, PricePath{{100, 90}});
  EXPECT_NEAR(down.VT, 0.0, 1e-9);
  auto mid = simulate_hedge(payoffs::call(100), m, PricePath{{100, 101}});
  EXPECT_GT(mid.error, 0.0);
}

TEST(SimulateHedge, ZeroPayoffConstantPath) {
  auto m = MarketModel::uniform(100, 0.9, 1.1, 0.01, 3);
  auto ep = simulate_hedge(payoffs::zero(), m, PricePath{{100, 100, 100, 100}});
  EXPECT_NEAR(ep.VT, 0.0, 1e-12);
  EXPECT_NEAR(ep.error, 0.0, 1e-14);
}

TEST(SimulateHedge, SuperhedgesInSupportPaths) {
  std::mt19937_64 rng(79);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    auto m = random_model(rng, 4);
    auto payoff = random_payoff(rng);
    auto priced = price_multi_step(payoff, m);
    for (int k = 0; k < 25; ++k) {
      PricePath path{{m.spot}};
      for (std::size_t t = 0; t < m.horizon(); ++t) {
        double w = u(rng);
        double r = k % 3 == 0 ? (w < 0.5 ? m.alpha[t] : m.beta[t])
                              : m.alpha[t] + (m.beta[t] - m.alpha[t]) * w;
        path.S.push_back(path.S.back() * r);
      }
      auto ep = simulate_hedge(priced, payoff, m, path);
      EXPECT_GE(ep.VT, ep.payoff - 1e-8 * m.spot);
    }
  }
}

TEST(SimulateHedge, OneStepShortfallBindsAtAnEndpoint) {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 200; ++trial) {
    auto m = random_model(rng, 1);
    auto payoff = random_payoff(rng);
    auto priced = price_multi_step(payoff, m);
    double worst = kInf;
    for (double r : {m.alpha[0], m.beta[0]}) {
      auto ep = simulate_hedge(priced, payoff, m, PricePath{{m.spot, m.spot * r}});
      EXPECT_GE(ep.VT - ep.payoff, -1e-8 * m.spot);
      worst = std::min(worst, ep.VT - ep.payoff);
    }
    EXPECT_NEAR(worst, 0.0, 1e-8 * m.spot);
  }
}

TEST(SimulateHedge, RejectsWrongPathLength) {
  auto m = MarketModel::uniform(100, 0.9, 1.1, 0.01, 2);
  EXPECT_THROW(simulate_hedge(payoffs::call(100), m, PricePath{{100, 101}}), ValidationError);
}

}  // namespace
}  // namespace superhedge
