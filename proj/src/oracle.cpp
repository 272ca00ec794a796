#include "superhedge/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "superhedge/errors.hpp"

namespace superhedge {

double DistortionMap::phi(double x) const { return x - kappa * std::abs(x + phi_prev); }

double DistortionMap::inverse(double y) const {
  // Phi(-phi_prev) = -phi_prev.
  if (y <= -phi_prev) return (y - kappa * phi_prev) / (1.0 + kappa);
  return (y + kappa * phi_prev) / (1.0 - kappa);
}

double DistortionMap::hat(double x) const { return -phi(-x); }

DualWorkspace dual_workspace(const PayoffSystem& system, double alpha, double beta,
                             double kappa, double S_prev) {
  DualWorkspace ws;
  for (const auto& c : system.components) {
    ws.m.push_back((1.0 + c.mu) * alpha * S_prev);
    ws.M.push_back((1.0 + c.mu) * beta * S_prev);
  }
  ws.m1_plus = ws.m.front() / (1.0 + kappa);
  ws.m1_minus = ws.m.front() / (1.0 - kappa);
  ws.MN_plus = ws.M.back() / (1.0 + kappa);
  ws.MN_minus = ws.M.back() / (1.0 - kappa);
  return ws;
}

namespace {

// gbar_i(x) = ghat_i(x / (1 + mu_i)) at both ends of K^i.
struct SupportEnds {
  double m, M, at_m, at_M;
};

std::vector<SupportEnds> support_ends(const PayoffSystem& system, double alpha, double beta,
                                      double S_prev) {
  std::vector<SupportEnds> out;
  for (const auto& c : system.components) {
    double m = (1.0 + c.mu) * alpha * S_prev;
    double M = (1.0 + c.mu) * beta * S_prev;
    out.push_back({m, M, c.ghat(m / (1.0 + c.mu)), c.ghat(M / (1.0 + c.mu))});
  }
  return out;
}

double grid_objective(const std::vector<SupportEnds>& ends, double phi, double phi_prev,
                      double S_prev, double kappa) {
  double sup = -kInf;
  for (const auto& e : ends) {
    sup = std::max({sup, e.at_m - phi * e.m, e.at_M - phi * e.M});
  }
  return sup + phi * S_prev + kappa * std::abs(phi - phi_prev) * S_prev;
}

}  // namespace

double grid_price(const PayoffSystem& system, double phi_prev, double S_prev, double alpha,
                  double beta, double kappa, const GridSpec& grid) {
  if (!(grid.step > 0.0) || grid.rounds < 0) throw ValidationError("invalid grid spec");
  auto ends = support_ends(system, alpha, beta, S_prev);
  auto F = [&](double phi) { return grid_objective(ends, phi, phi_prev, S_prev, kappa); };

  double lo, hi;
  if (grid.range) {
    std::tie(lo, hi) = *grid.range;
    if (!(lo < hi)) throw ValidationError("grid range must satisfy lo < hi");
  } else {
    // Scale of the delta-hedge slopes (g(M) - g(m1)) / (M - m1).
    double scale = std::max(1.0, std::abs(phi_prev));
    const double m1 = ends.front().m, y1 = ends.front().at_m;
    for (const auto& e : ends) {
      for (auto [x, y] : {std::pair{e.m, e.at_m}, std::pair{e.M, e.at_M}}) {
        if (x > m1) scale = std::max(scale, std::abs((y - y1) / (x - m1)));
      }
    }
    lo = -10.0 * scale;
    hi = 10.0 * scale;
  }

  double step = grid.step;
  double best_phi = 0.0, best = kInf;
  // Coarse pass; widen the range while the minimiser sits on its edge.
  for (int widen = 0;; ++widen) {
    auto n = static_cast<long>(std::ceil((hi - lo) / step));
    if (n > 50'000'000) throw NumericalError("grid oracle: range exhausted");
    long arg = 0;
    best = kInf;
    for (long k = 0; k <= n; ++k) {
      double phi = std::min(lo + static_cast<double>(k) * step, hi);
      double v = F(phi);
      if (v < best) {
        best = v;
        arg = k;
      }
    }
    best_phi = std::min(lo + static_cast<double>(arg) * step, hi);
    bool at_edge = arg == 0 || arg == n;
    if (!at_edge) break;
    if (widen >= 12) throw NumericalError("grid oracle: range exhausted");
    double width = hi - lo;
    lo -= width;
    hi += width;
  }
  for (int r = 0; r < grid.rounds; ++r) {
    double left = best_phi - step;
    step /= 100.0;
    for (int k = 0; k <= 200; ++k) {
      double phi = left + k * step;
      double v = F(phi);
      if (v < best) {
        best = v;
        best_phi = phi;
      }
    }
  }
  return best;
}

std::optional<ConvexPWL> lower_convex_envelope(std::span<const std::pair<double, double>> points,
                                               double left_slope, double right_slope) {
  if (points.empty()) throw ValidationError("envelope of no points");
  if (left_slope > right_slope) return std::nullopt;
  auto slope = [](const std::pair<double, double>& a, const std::pair<double, double>& b) {
    return (b.second - a.second) / (b.first - a.first);
  };
  // Monotone-chain lower hull.
  std::vector<std::pair<double, double>> hull;
  for (const auto& pt : points) {
    if (!hull.empty() && pt.first == hull.back().first) {
      hull.back().second = std::min(hull.back().second, pt.second);
      continue;
    }
    while (hull.size() >= 2 &&
           slope(hull[hull.size() - 2], pt) <= slope(hull[hull.size() - 2], hull.back())) {
      hull.pop_back();
    }
    hull.push_back(pt);
  }
  // The rays must not cut below the hull.
  std::size_t first = 0, last = hull.size() - 1;
  while (first < last && slope(hull[first], hull[first + 1]) < left_slope) ++first;
  while (last > first && slope(hull[last - 1], hull[last]) > right_slope) --last;

  std::vector<double> breaks;
  std::vector<AffineLine> lines;
  auto through = [](double s, const std::pair<double, double>& pt) {
    return AffineLine{s, pt.second - s * pt.first};
  };
  lines.push_back(through(left_slope, hull[first]));
  for (std::size_t k = first; k < last; ++k) {
    breaks.push_back(hull[k].first);
    lines.push_back(through(slope(hull[k], hull[k + 1]), hull[k]));
  }
  breaks.push_back(hull[last].first);
  lines.push_back(through(right_slope, hull[last]));
  // Equal consecutive slopes (e.g. a ray continuing a segment) are merged
  // by from_pieces; non-increasing ones cannot occur after the trimming.
  std::vector<double> b2;
  std::vector<AffineLine> l2{lines.front()};
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].slope <= l2.back().slope) {
      l2.back() = lines[k];
      continue;
    }
    b2.push_back(breaks[k - 1]);
    l2.push_back(lines[k]);
  }
  return ConvexPWL::from_pieces(-kInf, kInf, std::move(b2), std::move(l2));
}

double dual_price(const PayoffSystem& system, double phi_prev, double S_prev, double alpha,
                  double beta, double kappa) {
  if (!(kappa >= 0.0 && kappa < 1.0)) throw ValidationError("kappa must lie in [0,1)");
  // f* = max_i (-gbar_i + indicator of K^i)*; -gbar_i is concave, so its
  // convex hull on K^i is the chord through the support ends.
  std::optional<ConvexPWL> fstar;
  for (const auto& e : support_ends(system, alpha, beta, S_prev)) {
    ConvexPWL chord;
    if (e.M > e.m) {
      double s = (-e.at_M + e.at_m) / (e.M - e.m);
      chord = ConvexPWL::affine({s, -e.at_m - s * e.m}, e.m, e.M);
    } else {
      chord = ConvexPWL::constant(-e.at_m, e.m, e.m);
    }
    auto conj = conjugate(chord);
    fstar = fstar ? pointwise_max(*fstar, conj) : conj;
  }

  // f* o Phi^{-1}: vertices at Phi(breakpoints of f*) and at the kink of Phi.
  DistortionMap dm{kappa, phi_prev};
  std::vector<double> ys(fstar->breakpoints().begin(), fstar->breakpoints().end());
  ys.push_back(-phi_prev);
  std::sort(ys.begin(), ys.end());
  std::vector<std::pair<double, double>> pts;
  for (double y : ys) pts.emplace_back(dm.phi(y), (*fstar)(y));
  double left = fstar->min_slope() / (1.0 + kappa);
  double right = fstar->max_slope() / (1.0 - kappa);
  auto env = lower_convex_envelope(pts, left, right);
  if (!env) return -kInf;
  double value = conjugate(*env)(S_prev);
  if (std::isinf(value)) return -kInf;
  return -value;
}

const char* to_string(BarphiRegion r) {
  switch (r) {
    case BarphiRegion::Below: return "below";
    case BarphiRegion::Lower: return "lower";
    case BarphiRegion::Upper: return "upper";
    case BarphiRegion::Above: return "above";
  }
  return "?";
}

BarphiRegion barphi_region(const DualWorkspace& ws, double x) {
  if (x < ws.m1_plus) return BarphiRegion::Below;
  if (x > ws.MN_minus) return BarphiRegion::Above;
  if (x < ws.m1_minus) return BarphiRegion::Lower;
  return BarphiRegion::Upper;
}

double barphi_price(const PayoffSystem& system, double phi_prev, double S_prev, double alpha,
                    double beta, double kappa, double x, std::optional<BarphiRegion> force) {
  auto ws = dual_workspace(system, alpha, beta, kappa, S_prev);
  auto region = force ? *force : barphi_region(ws, x);
  if (region == BarphiRegion::Below || region == BarphiRegion::Above) return -kInf;

  auto ends = support_ends(system, alpha, beta, S_prev);
  const double m1 = ends.front().m;
  const double y1 = ends.front().at_m;
  // Delta lines p_j = 1 / (x_j - m1), b_j = (y_j - y1) p_j over the support
  // ends x_j other than m1; ends equal to m1 only set a floor on v.
  std::vector<double> p, b;
  double v0 = 0.0;
  for (std::size_t i = 0; i < ends.size(); ++i) {
    for (int side = 0; side < 2; ++side) {
      if (i == 0 && side == 0) continue;
      double xe = side == 0 ? ends[i].m : ends[i].M;
      double ye = side == 0 ? ends[i].at_m : ends[i].at_M;
      if (xe == m1) {
        v0 = std::max(v0, ye - y1);
        continue;
      }
      p.push_back(1.0 / (xe - m1));
      b.push_back((ye - y1) * p.back());
    }
  }

  MaxAffineFamily fam;
  fam.lower = v0;
  if (region == BarphiRegion::Lower) {
    double eta = (1.0 + kappa) * x - m1;
    fam.lines.push_back({1.0, eta * phi_prev - kappa * phi_prev * x + y1});
    for (std::size_t j = 0; j < p.size(); ++j) {
      fam.lines.push_back({1.0 - eta * p[j], eta * b[j] - kappa * phi_prev * x + y1});
    }
  } else {
    for (double r : {1.0, -1.0}) {
      double eta = (1.0 + r * kappa) * x - m1;
      for (std::size_t j = 0; j < p.size(); ++j) {
        fam.lines.push_back({1.0 - eta * p[j], eta * b[j] - r * kappa * phi_prev * x + y1});
      }
    }
  }
  return min_max_affine(fam).value;
}

}  // namespace superhedge
