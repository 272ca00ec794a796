#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "superhedge/market.hpp"
#include "superhedge/strategy.hpp"

namespace superhedge {

struct BacktestConfig {
  CalibrationSpec calibration;
  std::vector<double> kappas;          // cost rates as fractions (0.002 = 0.2%)
  std::size_t max_eval_weeks = 100;    // 0 evaluates every week with enough history
  std::size_t threads = 0;             // 0: SUPERHEDGE_THREADS or hardware concurrency
};

/// The default cost grid 0.2%, 0.4%, ..., 2.0%.
std::vector<double> default_kappa_grid();

struct KappaRow {
  double kappa = 0.0;
  std::size_t episodes = 0;
  double mean_error = 0.0;    // fractions of S_0
  double std_error = 0.0;     // sample standard deviation
  double mean_v0 = 0.0;       // V_0 / S_0
  double prob_nonneg = 0.0;   // share of episodes with error >= 0
};

struct AffineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y = slope * x + intercept; needs two distinct x.
AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y);

struct StatsReport {
  std::vector<KappaRow> rows;  // sorted by kappa
  AffineFit v0_fit;            // mean V_0/S_0 against kappa
  std::size_t evaluated_weeks = 0;
  std::size_t skipped_weeks = 0;    // calibration failed
  std::size_t aip_failures = 0;     // (week, kappa) pairs excluded
  std::size_t day_steps = 0;
  std::size_t support_violations = 0;
  double support_violation_rate = 0.0;
  std::vector<std::string> notes;
};

struct BacktestResult {
  std::vector<HedgeEpisode> episodes;  // by week, then by kappa
  StatsReport report;
};

/// Rolling-window backtest of at-the-money calls over the weekly blocks.
/// Evaluation starts at the first week with a full calibration window.
BacktestResult run_backtest(const std::vector<WeekBlock>& weeks, const BacktestConfig& config);
BacktestResult run_backtest(const PriceSeries& series, const BacktestConfig& config);

/// Writes stats.json, table1.csv, errors_by_kappa.csv and v0_vs_kappa.csv.
void emit_report(const StatsReport& report, const std::vector<HedgeEpisode>& episodes,
                 const std::filesystem::path& out_dir);

/// Worker count: `requested` if nonzero, else SUPERHEDGE_THREADS, else the
/// hardware concurrency; never more than `work`.
std::size_t worker_count(std::size_t requested, std::size_t work);

}  // namespace superhedge
