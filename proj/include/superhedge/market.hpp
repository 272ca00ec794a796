#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace superhedge {

/// Deterministic one-step supports [alpha[t], beta[t]] for S_{t+1}/S_t,
/// proportional cost rates kappa[t] and the initial spot.
struct MarketModel {
  double spot = 1.0;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> kappa;

  std::size_t horizon() const { return alpha.size(); }

  /// Throws ValidationError unless 0 <= alpha < beta, 0 <= kappa < 1,
  /// spot > 0 and all vectors have the same nonzero length.
  void validate() const;

  static MarketModel uniform(double spot, double alpha, double beta, double kappa,
                             std::size_t steps);
};

/// Realised prices S_0..S_T. Ratios may fall outside the model supports.
struct PricePath {
  std::vector<double> S;
};

struct PriceSeries {
  std::vector<std::chrono::sys_days> dates;
  std::vector<double> close;

  std::size_t size() const { return close.size(); }
};

/// Reads CSV with a header row containing `date` and `close` columns (other
/// columns are ignored). Dates are ISO-8601 (YYYY-MM-DD) and strictly
/// increasing. Throws DataError with the 1-based data row on bad input.
PriceSeries load_prices(std::istream& in);
PriceSeries load_prices(const std::filesystem::path& file);

struct CalibrationSpec {
  std::size_t window_weeks = 52;
  std::size_t days_per_week = 4;  // first trading days of each week, Monday onwards

  void validate() const;
};

/// The first `days_per_week` observations of one calendar week.
struct WeekBlock {
  std::chrono::sys_days monday;
  std::vector<double> prices;
  std::vector<std::size_t> rows;  // indices into the source series
};

/// Groups a series into ISO weeks. Only observations from Monday up to
/// Monday + days_per_week - 1 count; weeks missing any of them are dropped.
std::vector<WeekBlock> build_weeks(const PriceSeries& series, const CalibrationSpec& spec);

struct SupportBounds {
  std::vector<double> alpha;
  std::vector<double> beta;
};

/// Min/max of the intraweek ratios S_{t+1}/S_t over the `window_weeks`
/// blocks immediately before `target`. Throws DataError on insufficient
/// history or when a step has identical min and max.
SupportBounds calibrate(const std::vector<WeekBlock>& weeks, std::size_t target,
                        const CalibrationSpec& spec);

std::chrono::sys_days parse_iso_date(const std::string& text);
std::string format_iso_date(std::chrono::sys_days day);

}  // namespace superhedge
