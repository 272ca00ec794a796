#pragma once

#include <limits>
#include <span>
#include <vector>

namespace superhedge {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// x -> slope * x + intercept.
struct AffineLine {
  double slope = 0.0;
  double intercept = 0.0;

  constexpr double operator()(double x) const { return slope * x + intercept; }
};

/// Convex, continuous, piecewise-linear function on a closed interval
/// [lo, hi] (either end may be infinite), equal to +inf outside of it.
///
/// Stored as strictly increasing interior breakpoints plus one affine piece
/// per sub-interval. Slopes strictly increase from piece to piece; adjacent
/// collinear pieces are merged on construction. A degenerate domain
/// lo == hi is allowed and carries a single constant piece.
class ConvexPWL {
 public:
  /// Builds from raw pieces and canonicalises (merges collinear pieces,
  /// snaps near-duplicate breakpoints). Throws ValidationError when the
  /// pieces are not convex or the sizes do not match.
  static ConvexPWL from_pieces(double lo, double hi, std::vector<double> breaks,
                               std::vector<AffineLine> lines);

  static ConvexPWL affine(AffineLine line, double lo = -kInf, double hi = kInf);
  static ConvexPWL constant(double value, double lo = -kInf, double hi = kInf);

  /// Upper envelope of `lines` restricted to [lo, hi].
  static ConvexPWL max_of_lines(std::span<const AffineLine> lines, double lo = -kInf,
                                double hi = kInf);

  ConvexPWL() : ConvexPWL(constant(0.0)) {}

  double operator()(double x) const;

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::span<const double> breakpoints() const { return breaks_; }
  std::span<const AffineLine> pieces() const { return lines_; }

  double min_slope() const { return lines_.front().slope; }
  double max_slope() const { return lines_.back().slope; }

  /// Checks the class invariants (sorted breakpoints strictly inside the
  /// domain, strictly increasing slopes, continuity at breakpoints).
  bool is_valid(double tol = 1e-9) const;

 private:
  ConvexPWL(double lo, double hi, std::vector<double> breaks, std::vector<AffineLine> lines)
      : lo_(lo), hi_(hi), breaks_(std::move(breaks)), lines_(std::move(lines)) {}

  std::size_t piece_index(double x) const;

  double lo_;
  double hi_;
  std::vector<double> breaks_;
  std::vector<AffineLine> lines_;
};

/// x -> f(c * x), c > 0.
ConvexPWL scale_arg(const ConvexPWL& f, double c);

/// lambda * f + (1 - lambda) * g on the intersection of the domains.
ConvexPWL convex_combine(double lambda, const ConvexPWL& f, const ConvexPWL& g);

/// max(f, g) on the intersection of the domains, crossing points inserted.
ConvexPWL pointwise_max(const ConvexPWL& f, const ConvexPWL& g);

/// Legendre-Fenchel conjugate y -> sup_x (x y - f(x)).
///
/// Slopes of the result are the breakpoints (and finite domain ends) of f;
/// its breakpoints are the slopes of f. A bounded domain makes the
/// conjugate finite on the corresponding side.
ConvexPWL conjugate(const ConvexPWL& f);

/// max_j (a_j * v + b_j) to be minimised over v in [lower, upper].
struct MaxAffineFamily {
  std::vector<AffineLine> lines;
  double lower = -kInf;
  double upper = kInf;
};

struct MinMaxResult {
  double value;   // may be -inf
  double argmin;  // smallest kink or bound attaining the minimum; +inf/-inf
                  // when the infimum is only reached at infinity
};

/// Closed-form minimum of a maximum of affine functions: the maximum over
/// crossing values of (non-positive slope, positive slope) pairs, plus the
/// boundary terms for finite bounds. Empty maxima are -inf. Lines with
/// duplicate slopes are reduced to the one with the largest intercept.
MinMaxResult min_max_affine(const MaxAffineFamily& family);

}  // namespace superhedge
