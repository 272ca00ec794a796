#include "superhedge/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <thread>

#include <json.hpp>

#include "superhedge/errors.hpp"
#include "superhedge/payoffs.hpp"

namespace superhedge {

std::vector<double> default_kappa_grid() {
  std::vector<double> k;
  for (int j = 1; j <= 10; ++j) k.push_back(0.002 * j);
  return k;
}

AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("fit needs two or more points");
  double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("fit needs two distinct x values");
  AffineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

std::size_t worker_count(std::size_t requested, std::size_t work) {
  std::size_t n = requested;
  if (n == 0) {
    if (const char* env = std::getenv("SUPERHEDGE_THREADS")) {
      long v = std::strtol(env, nullptr, 10);
      if (v > 0) n = static_cast<std::size_t>(v);
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, work));
}

namespace {

struct WeekOutcome {
  bool calibrated = false;
  std::string error;
  std::size_t day_steps = 0;
  std::size_t violations = 0;
  std::vector<HedgeEpisode> episodes;  // one per kappa that passed the AIP check
  std::size_t aip_failures = 0;
};

WeekOutcome run_week(const std::vector<WeekBlock>& weeks, std::size_t j,
                     const BacktestConfig& config) {
  WeekOutcome out;
  SupportBounds bounds;
  try {
    bounds = calibrate(weeks, j, config.calibration);
  } catch (const DataError& e) {
    out.error = e.what();
    return out;
  }
  out.calibrated = true;
  const auto& prices = weeks[j].prices;
  for (std::size_t t = 0; t + 1 < prices.size(); ++t) {
    double ratio = prices[t + 1] / prices[t];
    ++out.day_steps;
    if (ratio < bounds.alpha[t] || ratio > bounds.beta[t]) ++out.violations;
  }
  const double S0 = prices.front();
  const auto payoff = payoffs::call(S0);
  for (double kappa : config.kappas) {
    MarketModel model;
    model.spot = S0;
    model.alpha = bounds.alpha;
    model.beta = bounds.beta;
    model.kappa.assign(bounds.alpha.size(), kappa);
    try {
      auto ep = simulate_hedge(payoff, model, PricePath{prices});
      ep.week = j;
      ep.strike = S0;
      ep.kappa = kappa;
      out.episodes.push_back(std::move(ep));
    } catch (const AipViolation&) {
      ++out.aip_failures;
    }
  }
  return out;
}

}  // namespace

BacktestResult run_backtest(const std::vector<WeekBlock>& weeks, const BacktestConfig& config) {
  config.calibration.validate();
  for (double k : config.kappas) {
    if (!(k >= 0.0 && k < 1.0)) throw ValidationError("kappa values must lie in [0,1)");
  }
  const std::size_t first = config.calibration.window_weeks;
  std::size_t last = weeks.size();
  if (config.max_eval_weeks > 0) last = std::min(last, first + config.max_eval_weeks);
  if (first >= last) {
    throw DataError("not enough weeks: need more than " + std::to_string(first) +
                    " complete weeks, have " + std::to_string(weeks.size()));
  }

  const std::size_t work = last - first;
  std::vector<WeekOutcome> outcomes(work);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < work;) {
      outcomes[k] = run_week(weeks, first + k, config);
    }
  };
  std::vector<std::thread> pool;
  std::size_t n = worker_count(config.threads, work);
  for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  BacktestResult result;
  auto& rep = result.report;
  for (std::size_t k = 0; k < work; ++k) {
    auto& o = outcomes[k];
    if (!o.calibrated) {
      ++rep.skipped_weeks;
      rep.notes.push_back("week " + format_iso_date(weeks[first + k].monday) + ": " + o.error);
      continue;
    }
    ++rep.evaluated_weeks;
    rep.day_steps += o.day_steps;
    rep.support_violations += o.violations;
    rep.aip_failures += o.aip_failures;
    for (auto& ep : o.episodes) result.episodes.push_back(std::move(ep));
  }
  rep.support_violation_rate =
      rep.day_steps ? static_cast<double>(rep.support_violations) / rep.day_steps : 0.0;

  std::map<double, std::vector<const HedgeEpisode*>> by_kappa;
  for (double k : config.kappas) by_kappa[k];
  for (const auto& ep : result.episodes) by_kappa[ep.kappa].push_back(&ep);
  for (const auto& [kappa, eps] : by_kappa) {
    KappaRow row;
    row.kappa = kappa;
    row.episodes = eps.size();
    if (!eps.empty()) {
      double n_eps = static_cast<double>(eps.size());
      double sum = 0.0, v0 = 0.0, nonneg = 0.0;
      for (const auto* ep : eps) {
        sum += ep->error;
        v0 += ep->V0 / ep->path.front();
        if (ep->error >= 0.0) nonneg += 1.0;
      }
      row.mean_error = sum / n_eps;
      row.mean_v0 = v0 / n_eps;
      row.prob_nonneg = nonneg / n_eps;
      double ss = 0.0;
      for (const auto* ep : eps) ss += (ep->error - row.mean_error) * (ep->error - row.mean_error);
      row.std_error = eps.size() > 1 ? std::sqrt(ss / (n_eps - 1.0)) : 0.0;
    }
    rep.rows.push_back(row);
  }
  std::vector<double> xs, ys;
  for (const auto& r : rep.rows) {
    if (r.episodes == 0) continue;
    xs.push_back(r.kappa);
    ys.push_back(r.mean_v0);
  }
  if (xs.size() >= 2) {
    rep.v0_fit = fit_affine(xs, ys);
  } else {
    rep.notes.push_back("affine fit skipped: fewer than two cost rates with episodes");
  }
  return result;
}

BacktestResult run_backtest(const PriceSeries& series, const BacktestConfig& config) {
  return run_backtest(build_weeks(series, config.calibration), config);
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  return f;
}

}  // namespace

void emit_report(const StatsReport& report, const std::vector<HedgeEpisode>& episodes,
                 const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());

  {
    auto f = open_out(out_dir / "table1.csv");
    f << "kappa_pct,episodes,mean_error_pct,std_error_pct,v0_over_s0_pct,prob_error_nonneg\n";
    for (const auto& r : report.rows) {
      f << num(100 * r.kappa) << ',' << r.episodes << ',' << num(100 * r.mean_error) << ','
        << num(100 * r.std_error) << ',' << num(100 * r.mean_v0) << ',' << num(r.prob_nonneg)
        << '\n';
    }
  }
  {
    auto f = open_out(out_dir / "errors_by_kappa.csv");
    f << "kappa,week,error\n";
    for (const auto& ep : episodes) {
      f << num(ep.kappa) << ',' << ep.week << ',' << num(ep.error) << '\n';
    }
  }
  {
    auto f = open_out(out_dir / "v0_vs_kappa.csv");
    f << "kappa,week,v0_over_s0\n";
    for (const auto& ep : episodes) {
      f << num(ep.kappa) << ',' << ep.week << ',' << num(ep.V0 / ep.path.front()) << '\n';
    }
  }
  {
    // Numbers go through the same 10-digit formatting as the CSV files.
    auto j = [](double v) { return nlohmann::json::parse(num(v)); };
    nlohmann::ordered_json doc;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) {
      doc["rows"].push_back({{"kappa", j(r.kappa)},
                             {"episodes", r.episodes},
                             {"mean_error", j(r.mean_error)},
                             {"std_error", j(r.std_error)},
                             {"mean_v0_over_s0", j(r.mean_v0)},
                             {"prob_error_nonneg", j(r.prob_nonneg)}});
    }
    doc["v0_fit"] = {{"slope", j(report.v0_fit.slope)},
                     {"intercept", j(report.v0_fit.intercept)}};
    doc["evaluated_weeks"] = report.evaluated_weeks;
    doc["skipped_weeks"] = report.skipped_weeks;
    doc["aip_failures"] = report.aip_failures;
    doc["day_steps"] = report.day_steps;
    doc["support_violations"] = report.support_violations;
    doc["support_violation_rate"] = j(report.support_violation_rate);
    doc["notes"] = report.notes;
    auto f = open_out(out_dir / "stats.json");
    f << doc.dump(2) << '\n';
  }
}

}  // namespace superhedge
