#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "superhedge/errors.hpp"
#include "superhedge/instances.hpp"
#include "superhedge/payoffs.hpp"
#include "superhedge/pwl.hpp"
#include "support/brute.hpp"

namespace superhedge {
namespace {

ConvexPWL abs_fn() {
  const AffineLine l[] = {{-1, 0}, {1, 0}};
  return ConvexPWL::max_of_lines(l);
}

// Convex PWL on the real line or on a random interval.
ConvexPWL random_convex(std::mt19937_64& rng, bool bounded) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_int_distribution<int> n(1, 6);
  std::vector<AffineLine> lines;
  int k = n(rng);
  for (int i = 0; i < k; ++i) lines.push_back({u(rng), 3.0 * u(rng)});
  double lo = -kInf, hi = kInf;
  if (bounded) {
    lo = u(rng);
    hi = lo + 0.5 + std::abs(u(rng));
  }
  return ConvexPWL::max_of_lines(lines, lo, hi);
}

bool slopes_increase(const ConvexPWL& f) {
  auto p = f.pieces();
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (!(p[i].slope > p[i - 1].slope + 1e-12 * std::max(1.0, std::abs(p[i].slope)))) {
      return false;
    }
  }
  return true;
}

TEST(Eval, Examples) {
  EXPECT_DOUBLE_EQ(abs_fn()(-3.0), 3.0);
  EXPECT_DOUBLE_EQ(payoffs::call(100)(120.0), 20.0);
  auto f = ConvexPWL::affine({1.0, 0.0}, 0.0, 1.0);
  EXPECT_EQ(f(2.0), kInf);
  EXPECT_EQ(f(-0.1), kInf);
  EXPECT_DOUBLE_EQ(f(1.0), 1.0);
}

TEST(Construction, RejectsNonConvexPieces) {
  EXPECT_THROW(ConvexPWL::from_pieces(-kInf, kInf, {0.0}, {{1, 0}, {-1, 0}}), ValidationError);
  EXPECT_THROW(ConvexPWL::from_pieces(-kInf, kInf, {0.0, 1.0}, {{1, 0}}), ValidationError);
  EXPECT_THROW(ConvexPWL::from_pieces(1.0, 0.0, {}, {{1, 0}}), ValidationError);
}

TEST(Construction, MergesCollinearPieces) {
  auto f = ConvexPWL::from_pieces(-kInf, kInf, {0.0, 1.0}, {{0, 0}, {0, 0}, {1, -1}});
  EXPECT_EQ(f.breakpoints().size(), 1u);
  EXPECT_DOUBLE_EQ(f.breakpoints()[0], 1.0);
  EXPECT_TRUE(f.is_valid());
}

TEST(ScaleArg, Examples) {
  auto g = scale_arg(payoffs::call(100), 1.2);
  EXPECT_NEAR(g(100.0), 20.0, 1e-12);
  auto f = payoffs::call(100);
  auto same = scale_arg(f, 1.0);
  for (double x : {0.0, 50.0, 100.0, 150.0}) EXPECT_DOUBLE_EQ(same(x), f(x));
  auto h = scale_arg(payoffs::call(100), 0.9);
  ASSERT_EQ(h.breakpoints().size(), 1u);
  EXPECT_NEAR(h.breakpoints()[0], 100.0 / 0.9, 1e-12);
  EXPECT_THROW(scale_arg(f, 0.0), ValidationError);
  EXPECT_THROW(scale_arg(f, -1.0), ValidationError);
}

TEST(ScaleArg, MatchesSubstitutionOnRandomGrid) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> c(0.1, 3.0), x(0.0, 300.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto f = random_payoff(rng);
    double k = c(rng);
    auto g = scale_arg(f, k);
    ASSERT_TRUE(slopes_increase(g));
    for (int i = 0; i < 50; ++i) {
      double xi = x(rng);
      EXPECT_NEAR(g(xi), f(k * xi), 1e-9 * std::max(1.0, std::abs(f(k * xi))));
    }
  }
}

TEST(ConvexCombine, Examples) {
  auto f = payoffs::call(90), g = payoffs::call(120);
  auto at1 = convex_combine(1.0, f, g);
  auto at0 = convex_combine(0.0, f, g);
  for (double x : {0.0, 95.0, 130.0}) {
    EXPECT_DOUBLE_EQ(at1(x), f(x));
    EXPECT_DOUBLE_EQ(at0(x), g(x));
  }
  // 1/3 * 60 + 2/3 * 30
  EXPECT_NEAR(convex_combine(1.0 / 3.0, f, g)(150.0), 40.0, 1e-12);
  EXPECT_THROW(convex_combine(1.5, f, g), ValidationError);
  EXPECT_THROW(convex_combine(0.5, ConvexPWL::constant(0, 0, 1), ConvexPWL::constant(0, 2, 3)),
               ValidationError);
}

TEST(ConvexCombine, PointwiseOnRandomInputs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lam(0.0, 1.0), x(-20.0, 20.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = random_convex(rng, false), g = random_convex(rng, false);
    double l = lam(rng);
    auto h = convex_combine(l, f, g);
    ASSERT_TRUE(h.is_valid());
    ASSERT_TRUE(slopes_increase(h));
    for (int i = 0; i < 1000; ++i) {
      double xi = x(rng);
      double want = l * f(xi) + (1 - l) * g(xi);
      ASSERT_NEAR(h(xi), want, 1e-9 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(PointwiseMax, Examples) {
  auto id = ConvexPWL::affine({1, 0}), neg = ConvexPWL::affine({-1, 0});
  auto m = pointwise_max(id, neg);
  for (double x : {-3.0, 0.0, 2.5}) EXPECT_DOUBLE_EQ(m(x), std::abs(x));
  auto f = abs_fn();
  auto ff = pointwise_max(f, f);
  EXPECT_EQ(ff.breakpoints().size(), f.breakpoints().size());
  const AffineLine call90[] = {{0, 0}, {1, -90}};
  auto h = pointwise_max(ConvexPWL::max_of_lines(call90), ConvexPWL::affine({0.5, -40}));
  ASSERT_EQ(h.breakpoints().size(), 2u);
  EXPECT_NEAR(h.breakpoints()[0], 80.0, 1e-12);
  EXPECT_NEAR(h.breakpoints()[1], 100.0, 1e-12);
  for (double x = 0; x < 200; x += 0.37) {
    EXPECT_NEAR(h(x), std::max(std::max(x - 90, 0.0), 0.5 * x - 40), 1e-12);
  }
}

TEST(PointwiseMax, PointwiseOnRandomInputs) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> x(-20.0, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto f = random_convex(rng, false), g = random_convex(rng, false);
    auto h = pointwise_max(f, g);
    ASSERT_TRUE(h.is_valid());
    ASSERT_TRUE(slopes_increase(h));
    for (int i = 0; i < 200; ++i) {
      double xi = x(rng);
      double want = std::max(f(xi), g(xi));
      ASSERT_NEAR(h(xi), want, 1e-9 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(Conjugate, AbsoluteValueGivesIndicator) {
  auto c = conjugate(abs_fn());
  EXPECT_DOUBLE_EQ(c.lo(), -1.0);
  EXPECT_DOUBLE_EQ(c.hi(), 1.0);
  for (double y : {-1.0, -0.3, 0.0, 1.0}) EXPECT_NEAR(c(y), 0.0, 1e-15);
  EXPECT_EQ(c(1.5), kInf);
}

TEST(Conjugate, AffineGivesPoint) {
  auto c = conjugate(ConvexPWL::affine({2.0, 3.0}));
  EXPECT_DOUBLE_EQ(c.lo(), 2.0);
  EXPECT_DOUBLE_EQ(c.hi(), 2.0);
  EXPECT_DOUBLE_EQ(c(2.0), -3.0);
  EXPECT_EQ(c(2.1), kInf);
  // and back
  auto back = conjugate(c);
  EXPECT_DOUBLE_EQ(back(5.0), 13.0);
}

TEST(Conjugate, TwoPiecesOnCompactClosedForm) {
  const double a = -1.0, b = 2.0, c = 0.5, d = 0.5, m = -2.0, M = 3.0;
  const double t = (d - b) / (a - c);  // crossing of the two pieces
  auto f = ConvexPWL::from_pieces(m, M, {t}, {{a, b}, {c, d}});
  auto fs = conjugate(f);
  auto closed = [&](double y) {
    if (y <= a) return (y - a) * m - b;
    if (y <= c) return (y - a) * t - b;
    return (y - c) * M - d;
  };
  for (double y = -6.0; y <= 6.0; y += 0.05) EXPECT_NEAR(fs(y), closed(y), 1e-12) << y;
}

TEST(Conjugate, InvolutionOnRandomInputs) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> x(-10.0, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    auto f = random_convex(rng, trial % 2 == 0);
    auto ff = conjugate(conjugate(f));
    ASSERT_TRUE(slopes_increase(conjugate(f)));
    EXPECT_DOUBLE_EQ(ff.lo(), f.lo());
    EXPECT_DOUBLE_EQ(ff.hi(), f.hi());
    for (int i = 0; i < 100; ++i) {
      double xi = x(rng);
      double want = f(xi);
      if (std::isinf(want)) {
        EXPECT_EQ(ff(xi), kInf);
      } else {
        EXPECT_NEAR(ff(xi), want, 1e-10 * std::max(1.0, std::abs(want)));
      }
    }
  }
}

TEST(Conjugate, CompactSupportIsFiniteEverywhere) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = random_convex(rng, true);
    auto c = conjugate(f);
    EXPECT_EQ(c.lo(), -kInf);
    EXPECT_EQ(c.hi(), kInf);
    EXPECT_DOUBLE_EQ(c.min_slope(), f.lo());
    EXPECT_DOUBLE_EQ(c.max_slope(), f.hi());
  }
}

TEST(Conjugate, MatchesSupremumOnGrid) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    auto f = random_convex(rng, true);
    auto c = conjugate(f);
    for (double y = -6; y <= 6; y += 0.5) {
      double sup = -kInf;
      for (double x = f.lo(); x <= f.hi(); x += (f.hi() - f.lo()) / 20000) {
        sup = std::max(sup, x * y - f(x));
      }
      sup = std::max(sup, f.hi() * y - f(f.hi()));
      EXPECT_NEAR(c(y), sup, 1e-3 * std::max(1.0, std::abs(sup)));
      EXPECT_GE(c(y), sup - 1e-9);
    }
  }
}

TEST(MinMaxAffine, Examples) {
  auto r = min_max_affine({{{-1, 0}, {1, -2}}});
  EXPECT_DOUBLE_EQ(r.value, -1.0);
  EXPECT_DOUBLE_EQ(r.argmin, 1.0);
  r = min_max_affine({{{-1, 0}, {1, -2}}, 2.0, kInf});
  EXPECT_DOUBLE_EQ(r.value, 0.0);
  EXPECT_DOUBLE_EQ(r.argmin, 2.0);
  // 3a = 20 - 19a at a = 10/11.
  r = min_max_affine({{{3, 0}, {-19, 20}}, 0.0, kInf});
  EXPECT_NEAR(r.value, 30.0 / 11.0, 1e-12);
  EXPECT_NEAR(r.argmin, 10.0 / 11.0, 1e-12);
}

TEST(MinMaxAffine, CaseSmallCallInstance) {
  // 11 phi and 20 - 19 phi from the one-step call with costs: both lines
  // meet at phi = 2/3 with value 22/3.
  auto r = min_max_affine({{{11, 0}, {-19, 20}}});
  EXPECT_NEAR(r.value, 22.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.argmin, 2.0 / 3.0, 1e-12);
}

TEST(MinMaxAffine, UnboundedBelowConventions) {
  auto r = min_max_affine({{{-1, 0}, {-2, 1}}, 0.0, kInf});
  EXPECT_EQ(r.value, -kInf);
  EXPECT_EQ(r.argmin, kInf);
  r = min_max_affine({{{1, 0}, {2, 1}}});
  EXPECT_EQ(r.value, -kInf);
  EXPECT_EQ(r.argmin, -kInf);
  // Non-increasing with a flat line: the flat level, already reached at
  // the lower bound.
  r = min_max_affine({{{-1, 0}, {0, 3}}, 0.0, kInf});
  EXPECT_DOUBLE_EQ(r.value, 3.0);
  EXPECT_DOUBLE_EQ(r.argmin, 0.0);
  r = min_max_affine({{{-1, 0}, {0, 3}}, -10.0, kInf});
  EXPECT_DOUBLE_EQ(r.value, 3.0);
  EXPECT_DOUBLE_EQ(r.argmin, -3.0);
  // Finite upper bound makes everything finite.
  r = min_max_affine({{{-1, 0}, {-2, 1}}, 0.0, 4.0});
  EXPECT_DOUBLE_EQ(r.value, -4.0);
  EXPECT_DOUBLE_EQ(r.argmin, 4.0);
}

TEST(MinMaxAffine, DuplicateSlopesKeepLargestIntercept) {
  auto r = min_max_affine({{{-1, 0}, {-1, 5}, {1, -2}}});
  EXPECT_DOUBLE_EQ(r.value, 1.5);
  EXPECT_DOUBLE_EQ(r.argmin, 3.5);
}

TEST(MinMaxAffine, SmallestArgminOnFlatSegment) {
  auto r = min_max_affine({{{-1, 0}, {0, 1}, {1, -5}}});
  EXPECT_DOUBLE_EQ(r.value, 1.0);
  EXPECT_DOUBLE_EQ(r.argmin, -1.0);
}

TEST(MinMaxAffine, MatchesDenseGridOnRandomFamilies) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> s(-3.0, 3.0), b(-5.0, 5.0), bound(-3.0, 3.0);
  std::uniform_int_distribution<int> n(1, 8), shape(0, 2);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    MaxAffineFamily fam;
    int k = n(rng);
    for (int i = 0; i < k; ++i) fam.lines.push_back({s(rng), b(rng)});
    int sh = shape(rng);
    if (sh >= 1) fam.lower = bound(rng);
    if (sh == 2) fam.upper = fam.lower + 0.1 + std::abs(bound(rng));
    auto r = min_max_affine(fam);
    if (r.value == -kInf) {
      // Unbounded only when every slope has the same strict sign on an open side.
      bool all_neg = true, all_pos = true;
      for (const auto& l : fam.lines) {
        all_neg = all_neg && l.slope < 0;
        all_pos = all_pos && l.slope > 0;
      }
      EXPECT_TRUE((all_neg && std::isinf(fam.upper)) || (all_pos && std::isinf(fam.lower)));
      continue;
    }
    double g = testing::grid_min_max(fam);
    EXPECT_NEAR(r.value, g, 1e-4) << "trial " << trial;
    EXPECT_LE(r.value, g + 1e-9);
    // The reported argmin attains the value.
    double at = -kInf;
    for (const auto& l : fam.lines) at = std::max(at, l(r.argmin));
    EXPECT_NEAR(at, r.value, 1e-9 * std::max(1.0, std::abs(r.value)));
    EXPECT_GE(r.argmin, fam.lower);
    EXPECT_LE(r.argmin, fam.upper);
    ++checked;
  }
  EXPECT_GT(checked, 500);
}

TEST(Payoffs, FromPoints) {
  auto f = payoffs::from_points({{80, 20}, {100, 0}, {120, 0}, {140, 10}});
  EXPECT_DOUBLE_EQ(f(0), 100.0);
  EXPECT_DOUBLE_EQ(f(110), 0.0);
  EXPECT_DOUBLE_EQ(f(160), 20.0);
  EXPECT_THROW(payoffs::from_points({{0, 0}, {1, 1}, {2, 1}}), ValidationError);
  EXPECT_THROW(payoffs::from_points({{1, 0}, {1, 1}}), ValidationError);
  EXPECT_THROW(payoffs::from_points({{1, 0}}), ValidationError);
  auto p = payoffs::put(100);
  EXPECT_DOUBLE_EQ(p(80), 20.0);
  EXPECT_DOUBLE_EQ(p(120), 0.0);
  EXPECT_DOUBLE_EQ(payoffs::zero()(5.0), 0.0);
}

}  // namespace
}  // namespace superhedge
