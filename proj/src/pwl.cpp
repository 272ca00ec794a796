#include "superhedge/pwl.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "superhedge/errors.hpp"

namespace superhedge {
namespace {

constexpr double kSlopeTol = 1e-12;
constexpr double kSnapTol = 1e-12;

bool same_slope(double a, double b) {
  return std::abs(a - b) <= kSlopeTol * std::max({1.0, std::abs(a), std::abs(b)});
}

// A point strictly inside each sub-interval delimited by `cuts` within
// [lo, hi]; used to pick the active piece of an operand.
double probe(double left, double right) {
  if (std::isinf(left) && std::isinf(right)) return 0.0;
  if (std::isinf(left)) return right - 1.0;
  if (std::isinf(right)) return left + 1.0;
  return 0.5 * (left + right);
}

std::vector<double> merged_cuts(const ConvexPWL& f, const ConvexPWL& g, double lo, double hi) {
  std::vector<double> cuts;
  for (double b : f.breakpoints()) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  for (double b : g.breakpoints()) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out;
  for (double c : cuts) {
    if (out.empty() || c - out.back() > kSnapTol * std::max(1.0, std::abs(c))) out.push_back(c);
  }
  return out;
}

const AffineLine& active_piece(const ConvexPWL& f, double x) {
  auto br = f.breakpoints();
  auto idx = static_cast<std::size_t>(std::upper_bound(br.begin(), br.end(), x) - br.begin());
  return f.pieces()[idx];
}

}  // namespace

ConvexPWL ConvexPWL::from_pieces(double lo, double hi, std::vector<double> breaks,
                                 std::vector<AffineLine> lines) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
    throw ValidationError("ConvexPWL: invalid domain");
  }
  if (lines.size() != breaks.size() + 1) {
    throw ValidationError("ConvexPWL: need exactly one more piece than breakpoints");
  }
  for (const auto& l : lines) {
    if (!std::isfinite(l.slope) || !std::isfinite(l.intercept)) {
      throw ValidationError("ConvexPWL: non-finite piece");
    }
  }
  if (lo == hi) {
    double v = lines.front()(lo);
    return ConvexPWL(lo, hi, {}, {AffineLine{0.0, v}});
  }

  // Drop pieces lying entirely outside the domain.
  std::vector<double> b2;
  std::vector<AffineLine> l2;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    double left = k == 0 ? -kInf : breaks[k - 1];
    double right = k < breaks.size() ? breaks[k] : kInf;
    if (right <= lo || left >= hi) continue;
    if (!l2.empty()) b2.push_back(left);
    l2.push_back(lines[k]);
  }
  if (l2.empty()) l2.push_back(lines.front());

  // Merge collinear neighbours and snap breakpoints that are too close.
  std::vector<double> b3;
  std::vector<AffineLine> l3{l2.front()};
  for (std::size_t k = 1; k < l2.size(); ++k) {
    double cut = b2[k - 1];
    bool tiny_gap = !b3.empty() && cut - b3.back() <= kSnapTol * std::max(1.0, std::abs(cut));
    if (same_slope(l3.back().slope, l2[k].slope)) continue;
    if (tiny_gap) {
      // The piece between b3.back() and cut is negligible: replace it.
      l3.back() = l2[k];
      if (l3.size() >= 2 && same_slope(l3[l3.size() - 2].slope, l3.back().slope)) {
        l3.pop_back();
        b3.pop_back();
      }
      continue;
    }
    b3.push_back(cut);
    l3.push_back(l2[k]);
  }
  for (std::size_t k = 1; k < l3.size(); ++k) {
    if (l3[k].slope <= l3[k - 1].slope) {
      throw ValidationError("ConvexPWL: slopes must increase (non-convex pieces)");
    }
  }
  return ConvexPWL(lo, hi, std::move(b3), std::move(l3));
}

ConvexPWL ConvexPWL::affine(AffineLine line, double lo, double hi) {
  return from_pieces(lo, hi, {}, {line});
}

ConvexPWL ConvexPWL::constant(double value, double lo, double hi) {
  return from_pieces(lo, hi, {}, {AffineLine{0.0, value}});
}

ConvexPWL ConvexPWL::max_of_lines(std::span<const AffineLine> lines, double lo, double hi) {
  if (lines.empty()) throw ValidationError("max_of_lines: no lines");
  std::vector<AffineLine> sorted(lines.begin(), lines.end());
  std::sort(sorted.begin(), sorted.end(), [](const AffineLine& a, const AffineLine& b) {
    return a.slope < b.slope || (a.slope == b.slope && a.intercept < b.intercept);
  });
  std::vector<AffineLine> uniq;
  for (const auto& l : sorted) {
    if (!uniq.empty() && same_slope(uniq.back().slope, l.slope)) {
      if (l.intercept > uniq.back().intercept) uniq.back() = l;
    } else {
      uniq.push_back(l);
    }
  }
  auto cross = [](const AffineLine& a, const AffineLine& b) {
    return (a.intercept - b.intercept) / (b.slope - a.slope);
  };
  // Upper envelope over the real line, slopes increasing left to right.
  std::vector<AffineLine> hull;
  for (const auto& l : uniq) {
    while (hull.size() >= 2 &&
           cross(hull[hull.size() - 2], l) <= cross(hull[hull.size() - 2], hull.back())) {
      hull.pop_back();
    }
    hull.push_back(l);
  }
  std::vector<double> breaks;
  for (std::size_t k = 1; k < hull.size(); ++k) breaks.push_back(cross(hull[k - 1], hull[k]));
  return from_pieces(lo, hi, std::move(breaks), std::move(hull));
}

std::size_t ConvexPWL::piece_index(double x) const {
  return static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), x) -
                                  breaks_.begin());
}

double ConvexPWL::operator()(double x) const {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x < lo_ || x > hi_) return kInf;
  if (lo_ == hi_) return lines_.front().intercept;
  return lines_[piece_index(x)](x);
}

bool ConvexPWL::is_valid(double tol) const {
  if (lines_.size() != breaks_.size() + 1) return false;
  for (std::size_t k = 0; k < breaks_.size(); ++k) {
    double b = breaks_[k];
    if (!(b > lo_ && b < hi_)) return false;
    if (k > 0 && !(b > breaks_[k - 1])) return false;
    if (!(lines_[k + 1].slope > lines_[k].slope)) return false;
    double l = lines_[k](b), r = lines_[k + 1](b);
    if (std::abs(l - r) > tol * std::max(1.0, std::abs(l))) return false;
  }
  return true;
}

ConvexPWL scale_arg(const ConvexPWL& f, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("scale_arg: factor must be > 0");
  std::vector<double> breaks;
  for (double b : f.breakpoints()) breaks.push_back(b / c);
  std::vector<AffineLine> lines;
  for (const auto& l : f.pieces()) lines.push_back({l.slope * c, l.intercept});
  if (f.lo() == f.hi()) {
    return ConvexPWL::constant(f(f.lo()), f.lo() / c, f.hi() / c);
  }
  return ConvexPWL::from_pieces(f.lo() / c, f.hi() / c, std::move(breaks), std::move(lines));
}

namespace {

template <typename PieceOp>
ConvexPWL combine_pieces(const ConvexPWL& f, const ConvexPWL& g, PieceOp&& op,
                         const char* what) {
  double lo = std::max(f.lo(), g.lo());
  double hi = std::min(f.hi(), g.hi());
  if (lo > hi) throw ValidationError(std::string(what) + ": domains do not intersect");
  if (lo == hi) {
    std::vector<double> none;
    std::vector<AffineLine> pieces;
    op(lo, lo, active_piece(f, lo), active_piece(g, lo), none, pieces);
    return ConvexPWL::constant(pieces.front()(lo), lo, hi);
  }
  std::vector<double> cuts = merged_cuts(f, g, lo, hi);
  std::vector<double> breaks;
  std::vector<AffineLine> pieces;
  for (std::size_t k = 0; k <= cuts.size(); ++k) {
    double left = k == 0 ? lo : cuts[k - 1];
    double right = k < cuts.size() ? cuts[k] : hi;
    if (k > 0) breaks.push_back(left);
    double x = probe(left, right);
    op(left, right, active_piece(f, x), active_piece(g, x), breaks, pieces);
  }
  return ConvexPWL::from_pieces(lo, hi, std::move(breaks), std::move(pieces));
}

}  // namespace

ConvexPWL convex_combine(double lambda, const ConvexPWL& f, const ConvexPWL& g) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ValidationError("convex_combine: weight must lie in [0,1]");
  }
  if (lambda == 1.0 && f.lo() <= g.lo() && f.hi() >= g.hi() && f.lo() == g.lo() &&
      f.hi() == g.hi()) {
    return f;
  }
  return combine_pieces(
      f, g,
      [lambda](double, double, const AffineLine& a, const AffineLine& b, std::vector<double>&,
               std::vector<AffineLine>& out) {
        out.push_back({lambda * a.slope + (1.0 - lambda) * b.slope,
                       lambda * a.intercept + (1.0 - lambda) * b.intercept});
      },
      "convex_combine");
}

ConvexPWL pointwise_max(const ConvexPWL& f, const ConvexPWL& g) {
  double lo = std::max(f.lo(), g.lo());
  double hi = std::min(f.hi(), g.hi());
  if (lo > hi) throw ValidationError("pointwise_max: domains do not intersect");
  if (lo == hi) return ConvexPWL::constant(std::max(f(lo), g(lo)), lo, hi);
  // On its domain a convex PWL function is the maximum of its pieces, so the
  // result is the upper envelope of both piece sets. Picking the larger
  // operand per sub-interval instead goes wrong between clustered kinks.
  std::vector<AffineLine> lines(f.pieces().begin(), f.pieces().end());
  lines.insert(lines.end(), g.pieces().begin(), g.pieces().end());
  return ConvexPWL::max_of_lines(lines, lo, hi);
}

ConvexPWL conjugate(const ConvexPWL& f) {
  if (f.lo() == f.hi()) {
    double c = f.lo();
    if (std::isinf(c)) throw ValidationError("conjugate: improper function");
    return ConvexPWL::affine({c, -f(c)});
  }
  auto br = f.breakpoints();
  auto pcs = f.pieces();
  std::vector<double> breaks;
  std::vector<AffineLine> lines;
  double lo = std::isinf(f.lo()) ? pcs.front().slope : -kInf;
  double hi = std::isinf(f.hi()) ? pcs.back().slope : kInf;
  if (std::isfinite(f.lo())) {
    lines.push_back({f.lo(), -f(f.lo())});
  }
  for (std::size_t k = 0; k < br.size(); ++k) {
    if (!lines.empty()) breaks.push_back(pcs[k].slope);
    lines.push_back({br[k], -f(br[k])});
  }
  if (std::isfinite(f.hi())) {
    if (!lines.empty()) breaks.push_back(pcs.back().slope);
    lines.push_back({f.hi(), -f(f.hi())});
  }
  if (lines.empty()) {
    // Single affine piece on the whole line: finite at one slope only.
    return ConvexPWL::constant(-pcs.front().intercept, lo, hi);
  }
  return ConvexPWL::from_pieces(lo, hi, std::move(breaks), std::move(lines));
}

MinMaxResult min_max_affine(const MaxAffineFamily& family) {
  if (family.lines.empty()) throw ValidationError("min_max_affine: empty family");
  if (family.lower > family.upper) throw ValidationError("min_max_affine: empty interval");
  std::vector<AffineLine> lines(family.lines);
  std::sort(lines.begin(), lines.end(), [](const AffineLine& a, const AffineLine& b) {
    return a.slope < b.slope || (a.slope == b.slope && a.intercept > b.intercept);
  });
  lines.erase(std::unique(lines.begin(), lines.end(),
                          [](const AffineLine& a, const AffineLine& b) {
                            return a.slope == b.slope;
                          }),
              lines.end());

  const double lower = family.lower;
  const double upper = family.upper;
  auto T = [&](double v) {
    double m = -kInf;
    for (const auto& l : lines) m = std::max(m, l(v));
    return m;
  };

  std::vector<std::size_t> nonpos, pos;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    (lines[k].slope <= 0.0 ? nonpos : pos).push_back(k);
  }

  double value = -kInf;
  std::vector<double> candidates;
  for (auto i : nonpos) {
    for (auto j : pos) {
      const auto& li = lines[i];
      const auto& lj = lines[j];
      double at = (li.intercept - lj.intercept) / (lj.slope - li.slope);
      value = std::max(value, li(at));
    }
  }
  // Kinks of the maximum: any crossing may start a flat minimising segment.
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      double at = (lines[i].intercept - lines[j].intercept) / (lines[j].slope - lines[i].slope);
      if (at >= lower && at <= upper) candidates.push_back(at);
    }
  }
  if (std::isfinite(lower)) {
    for (auto j : pos) value = std::max(value, lines[j](lower));
    candidates.push_back(lower);
  }
  if (std::isfinite(upper)) {
    for (auto i : nonpos) value = std::max(value, lines[i](upper));
    candidates.push_back(upper);
  }
  if (std::isinf(upper) && pos.empty() && !nonpos.empty() && lines[nonpos.back()].slope == 0.0) {
    // Non-increasing maximum whose infimum is the flat line reached at +inf.
    value = std::max(value, lines[nonpos.back()].intercept);
  }

  if (value == -kInf) {
    return {value, pos.empty() ? kInf : -kInf};
  }
  double tol = 1e-11 * std::max(1.0, std::abs(value));
  double best = kInf;
  for (double c : candidates) {
    if (c < best && T(c) <= value + tol) best = c;
  }
  if (best == kInf) {
    // Only possible for a flat maximum; any point of the interval works.
    best = std::isfinite(lower) ? lower : (pos.empty() ? kInf : -kInf);
  }
  return {value, best};
}

}  // namespace superhedge
