#include "superhedge/market.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <cctype>
#include <cstdio>
#include <sstream>
#include <string>

#include "superhedge/errors.hpp"

namespace superhedge {

using std::chrono::sys_days;

void MarketModel::validate() const {
  if (!(spot > 0.0) || !std::isfinite(spot)) throw ValidationError("spot must be > 0");
  if (alpha.empty()) throw ValidationError("model needs at least one step");
  if (beta.size() != alpha.size() || kappa.size() != alpha.size()) {
    throw ValidationError("alpha, beta and kappa must have the same length");
  }
  for (std::size_t t = 0; t < alpha.size(); ++t) {
    if (!(alpha[t] >= 0.0) || !(alpha[t] < beta[t]) || !std::isfinite(beta[t])) {
      throw ValidationError("step " + std::to_string(t) + ": need 0 <= alpha < beta");
    }
    if (!(kappa[t] >= 0.0 && kappa[t] < 1.0)) {
      throw ValidationError("step " + std::to_string(t) + ": kappa must lie in [0,1)");
    }
  }
}

MarketModel MarketModel::uniform(double spot, double alpha, double beta, double kappa,
                                 std::size_t steps) {
  MarketModel m;
  m.spot = spot;
  m.alpha.assign(steps, alpha);
  m.beta.assign(steps, beta);
  m.kappa.assign(steps, kappa);
  m.validate();
  return m;
}

void CalibrationSpec::validate() const {
  if (window_weeks < 1) throw ValidationError("calibration window must be >= 1 week");
  if (days_per_week < 2 || days_per_week > 7) {
    throw ValidationError("days per week must be between 2 and 7");
  }
}

std::chrono::sys_days parse_iso_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  auto bad = [&] { return DataError("invalid date '" + text + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  auto num = [&](std::size_t pos, std::size_t len, auto& out) {
    auto r = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    if (r.ec != std::errc() || r.ptr != text.data() + pos + len) throw bad();
  };
  num(0, 4, y);
  num(5, 2, m);
  num(8, 2, d);
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                  std::chrono::day{d}};
  if (!ymd.ok()) throw bad();
  return sys_days{ymd};
}

std::string format_iso_date(std::chrono::sys_days day) {
  std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c) && c != '"'; };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

PriceSeries load_prices(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("no data rows");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = split(line);
  std::ptrdiff_t date_col = -1, close_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    auto name = lower(header[c]);
    if (name == "date") date_col = static_cast<std::ptrdiff_t>(c);
    if (name == "close") close_col = static_cast<std::ptrdiff_t>(c);
  }
  if (date_col < 0 || close_col < 0) {
    throw DataError("CSV header must contain 'date' and 'close' columns");
  }

  PriceSeries series;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++row;
    auto where = [&] { return "row " + std::to_string(row) + ": "; };
    auto cells = split(line);
    auto need = static_cast<std::size_t>(std::max(date_col, close_col));
    if (cells.size() <= need) throw DataError(where() + "missing columns");
    sys_days day;
    try {
      day = parse_iso_date(cells[static_cast<std::size_t>(date_col)]);
    } catch (const DataError& e) {
      throw DataError(where() + e.what());
    }
    const auto& text = cells[static_cast<std::size_t>(close_col)];
    double price = 0.0;
    auto r = std::from_chars(text.data(), text.data() + text.size(), price);
    if (text.empty() || r.ec != std::errc() || r.ptr != text.data() + text.size()) {
      throw DataError(where() + "missing or invalid close price");
    }
    if (!(price > 0.0) || !std::isfinite(price)) {
      throw DataError(where() + "close price must be > 0");
    }
    if (!series.dates.empty() && !(day > series.dates.back())) {
      throw DataError(where() + "dates must be strictly increasing");
    }
    series.dates.push_back(day);
    series.close.push_back(price);
  }
  if (series.close.empty()) throw DataError("no data rows");
  return series;
}

PriceSeries load_prices(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  return load_prices(in);
}

std::vector<WeekBlock> build_weeks(const PriceSeries& series, const CalibrationSpec& spec) {
  spec.validate();
  using std::chrono::days;
  using std::chrono::weekday;
  std::vector<WeekBlock> weeks;
  for (std::size_t i = 0; i < series.size(); ++i) {
    sys_days day = series.dates[i];
    unsigned iso = weekday{day}.iso_encoding();  // Monday = 1
    if (iso > spec.days_per_week) continue;
    sys_days monday = day - days{iso - 1};
    if (weeks.empty() || weeks.back().monday != monday) {
      weeks.push_back(WeekBlock{monday, {}, {}});
    }
    auto& w = weeks.back();
    // A missing weekday shows up as a gap between consecutive positions.
    if (w.prices.size() + 1 == iso) {
      w.prices.push_back(series.close[i]);
      w.rows.push_back(i);
    } else {
      w.prices.clear();
      w.rows.clear();
      w.prices.push_back(-1.0);  // poison: the block can no longer complete
    }
  }
  std::erase_if(weeks, [&](const WeekBlock& w) {
    return w.prices.size() != spec.days_per_week ||
           std::any_of(w.prices.begin(), w.prices.end(), [](double p) { return p <= 0.0; });
  });
  return weeks;
}

SupportBounds calibrate(const std::vector<WeekBlock>& weeks, std::size_t target,
                        const CalibrationSpec& spec) {
  spec.validate();
  if (target > weeks.size()) throw DataError("target week out of range");
  if (target < spec.window_weeks) {
    throw DataError("insufficient history: need " + std::to_string(spec.window_weeks) +
                    " complete weeks before the target week");
  }
  std::size_t steps = spec.days_per_week - 1;
  SupportBounds out{std::vector<double>(steps, std::numeric_limits<double>::infinity()),
                    std::vector<double>(steps, -std::numeric_limits<double>::infinity())};
  for (std::size_t k = target - spec.window_weeks; k < target; ++k) {
    const auto& prices = weeks[k].prices;
    if (prices.size() != spec.days_per_week) throw DataError("week block has wrong length");
    for (std::size_t t = 0; t < steps; ++t) {
      double ratio = prices[t + 1] / prices[t];
      out.alpha[t] = std::min(out.alpha[t], ratio);
      out.beta[t] = std::max(out.beta[t], ratio);
    }
  }
  for (std::size_t t = 0; t < steps; ++t) {
    if (!(out.alpha[t] < out.beta[t])) {
      throw DataError("degenerate calibration window at step " + std::to_string(t) +
                      ": all ratios identical");
    }
  }
  return out;
}

}  // namespace superhedge
