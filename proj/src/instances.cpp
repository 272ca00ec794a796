#include "superhedge/instances.hpp"

#include <algorithm>
#include <chrono>
#include <vector>

namespace superhedge {

ConvexPWL random_payoff(std::mt19937_64& rng, int max_kinks) {
  std::uniform_int_distribution<int> nk(0, max_kinks);
  std::uniform_real_distribution<double> loc(40.0, 160.0), sl(-1.0, 1.5), lift(0.0, 5.0);
  int k = nk(rng);
  std::vector<double> kinks(static_cast<std::size_t>(k)), slopes(static_cast<std::size_t>(k + 1));
  for (auto& x : kinks) x = loc(rng);
  for (auto& s : slopes) s = sl(rng);
  std::sort(kinks.begin(), kinks.end());
  std::sort(slopes.begin(), slopes.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  slopes.resize(kinks.size() + 1);
  slopes.back() = std::max(slopes.back(), 0.0);
  std::vector<AffineLine> lines{{slopes.front(), 0.0}};
  for (std::size_t i = 0; i < kinks.size(); ++i) {
    double y = lines.back()(kinks[i]);
    lines.push_back({slopes[i + 1], y - slopes[i + 1] * kinks[i]});
  }
  auto f = ConvexPWL::from_pieces(0.0, kInf, kinks, lines);
  // Shift up so the minimum (at 0 or at a kink) is nonnegative.
  double lowest = f(0.0);
  for (double x : f.breakpoints()) lowest = std::min(lowest, f(x));
  double shift = -lowest + lift(rng);
  for (auto& l : lines) l.intercept += shift;
  return ConvexPWL::from_pieces(0.0, kInf, kinks, lines);
}

double random_kappa(std::mt19937_64& rng) {
  static constexpr double kappas[] = {0.0, 0.005, 0.01, 0.05, 0.2};
  std::uniform_int_distribution<int> pick(0, 4);
  return kappas[pick(rng)];
}

OneStepInstance random_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> nsteps(0, 2);
  OneStepInstance inst;
  inst.kappa = random_kappa(rng);
  int prior = nsteps(rng);
  auto sys = PayoffSystem::terminal(random_payoff(rng), static_cast<std::size_t>(prior + 1));
  for (int s = 0; s < prior; ++s) {
    double a = 0.8 + 0.2 * u(rng), b = 1.0 + 0.2 * u(rng);
    sys = backward_step(sys, a, b, inst.kappa);
  }
  inst.system = std::move(sys);
  const double mu1 = inst.system.components.front().mu;
  const double muN = inst.system.components.back().mu;
  // Usually alpha <= 1 <= beta; sometimes push a bound across 1 as far as
  // the no-immediate-profit inequalities allow.
  double amax = (1.0 + inst.kappa) / (1.0 + mu1);
  double bmin = (1.0 - inst.kappa) / (1.0 + muN);
  inst.alpha = (u(rng) < 0.3 && amax > 1.0) ? 1.0 + (amax - 1.0) * u(rng) : 0.6 + 0.4 * u(rng);
  inst.beta = (u(rng) < 0.3 && bmin < 1.0) ? bmin + (1.0 - bmin) * u(rng) : 1.0 + 0.3 * u(rng);
  if (!(inst.beta > inst.alpha)) inst.beta = inst.alpha + 0.05 + 0.2 * u(rng);
  inst.phi_prev = -2.0 + 4.0 * u(rng);
  inst.S_prev = 50.0 + 100.0 * u(rng);
  return inst;
}

MarketModel random_model(std::mt19937_64& rng, std::size_t max_steps) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> ns(1, max_steps);
  MarketModel m;
  m.spot = 50.0 + 100.0 * u(rng);
  std::size_t T = ns(rng);
  double kappa = random_kappa(rng);
  for (std::size_t t = 0; t < T; ++t) {
    m.alpha.push_back(0.8 + 0.2 * u(rng));
    m.beta.push_back(1.0 + 0.2 * u(rng));
    m.kappa.push_back(kappa);
  }
  return m;
}

PriceSeries synthetic_series(std::size_t weeks, std::uint64_t seed) {
  using namespace std::chrono;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> inner(-24, 24), start(80, 160);
  PriceSeries s;
  sys_days monday = sys_days{year{2013} / June / 3};
  for (std::size_t w = 0; w < weeks; ++w) {
    std::vector<int> k(4);
    for (auto& x : k) x = inner(rng);
    int extreme_step = static_cast<int>((w / 6) % 4);
    // Friday (step 3) is outside the calibrated block; rotate over 0..2 only.
    if (extreme_step == 3) extreme_step = static_cast<int>((w / 24) % 3);
    if (w % 6 == 0) k[static_cast<std::size_t>(extreme_step)] = -32;
    if (w % 6 == 3) k[static_cast<std::size_t>(extreme_step)] = 32;
    double price = start(rng);
    for (int d = 0; d < 5; ++d) {
      s.dates.push_back(monday + days{d});
      s.close.push_back(price);
      if (d < 4) price *= 1.0 + k[static_cast<std::size_t>(d)] / 1024.0;
    }
    monday += days{7};
  }
  return s;
}

}  // namespace superhedge
