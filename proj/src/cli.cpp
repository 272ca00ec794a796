#include "superhedge/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "superhedge/backtest.hpp"
#include "superhedge/errors.hpp"
#include "superhedge/instances.hpp"
#include "superhedge/market.hpp"
#include "superhedge/oracle.hpp"
#include "superhedge/payoffs.hpp"
#include "superhedge/recursion.hpp"
#include "superhedge/strategy.hpp"

namespace superhedge {
namespace {

struct RunConfig {
  std::optional<double> alpha, beta, kappa, spot;
  std::size_t steps = 1;
  std::string model_file;

  std::optional<double> call, put;
  std::string pwl;
  std::string payoff;

  std::string path;
  std::string data;
  std::size_t synthetic = 0;
  std::string kappas;
  std::string out_dir = "backtest_out";
  std::size_t window = 52;
  std::size_t weeks = 100;
  std::size_t threads = 0;

  std::uint64_t seed = 1;
  std::size_t random = 0;
  double phi_prev = 0.0;
  double tol = 1e-6;
  std::optional<double> grid_step;
  std::optional<int> grid_rounds;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + "}";
}

std::vector<double> parse_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ValidationError(std::string("invalid number '") + cell + "' in " + what);
    }
  }
  if (out.empty()) throw ValidationError(std::string(what) + " is empty");
  return out;
}

MarketModel load_model_json(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
    MarketModel m;
    m.spot = doc.at("spot").get<double>();
    for (const auto& s : doc.at("steps")) {
      m.alpha.push_back(s.at("alpha").get<double>());
      m.beta.push_back(s.at("beta").get<double>());
      m.kappa.push_back(s.value("kappa", 0.0));
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(file + ": " + e.what());
  }
}

MarketModel build_model(const RunConfig& c) {
  if (!c.model_file.empty()) return load_model_json(c.model_file);
  if (!c.alpha || !c.beta || !c.spot) {
    throw ValidationError("need --alpha, --beta and --spot (or --model FILE)");
  }
  return MarketModel::uniform(*c.spot, *c.alpha, *c.beta, c.kappa.value_or(0.0), c.steps);
}

ConvexPWL build_payoff(const RunConfig& c) {
  int given = (c.call ? 1 : 0) + (c.put ? 1 : 0) + (c.pwl.empty() ? 0 : 1) + (c.payoff.empty() ? 0 : 1);
  if (given != 1) throw ValidationError("give exactly one of --call, --put, --pwl, --payoff");
  if (c.call) return payoffs::call(*c.call);
  if (c.put) return payoffs::put(*c.put);
  if (!c.payoff.empty()) {
    if (c.payoff == "zero") return payoffs::zero();
    throw ValidationError("unknown payoff '" + c.payoff + "'");
  }
  std::vector<std::pair<double, double>> pts;
  std::stringstream ss(c.pwl);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    auto colon = cell.find(':');
    if (colon == std::string::npos) throw ValidationError("--pwl points must be x:y");
    auto x = parse_numbers(cell.substr(0, colon), "--pwl");
    auto y = parse_numbers(cell.substr(colon + 1), "--pwl");
    pts.emplace_back(x.front(), y.front());
  }
  return payoffs::from_points(pts);
}

void print_systems(std::ostream& out, const MultiStepResult& r) {
  for (std::size_t t = 0; t < r.systems.size(); ++t) {
    const auto& s = r.systems[t];
    out << "t=" << t << " N=" << s.size() << " mu=" << list(s.mus()) << '\n';
  }
}

int cmd_price(const RunConfig& c, std::ostream& out) {
  auto model = build_model(c);
  auto payoff = build_payoff(c);
  auto r = price_multi_step(payoff, model);
  out << "p0 = " << num(r.p0) << '\n';
  print_systems(out, r);
  return kExitOk;
}

int cmd_hedge(const RunConfig& c, std::ostream& out) {
  auto model = build_model(c);
  auto payoff = build_payoff(c);
  if (c.path.empty()) throw ValidationError("hedge needs --path S0,S1,...,ST");
  PricePath path{parse_numbers(c.path, "--path")};
  auto ep = simulate_hedge(payoff, model, path);
  out << "t,S,phi,V,case,route\n";
  for (std::size_t t = 0; t < path.S.size(); ++t) {
    out << t << ',' << num(path.S[t]) << ',';
    if (t < ep.phi.size()) {
      out << num(ep.phi[t]);
    }
    out << ',' << num(ep.V[t]) << ',';
    if (t < ep.decisions.size()) {
      out << to_string(ep.decisions[t].cost_case) << ',' << to_string(ep.decisions[t].route);
    } else {
      out << ',';
    }
    out << '\n';
  }
  out << "V0 = " << num(ep.V0) << '\n';
  out << "VT = " << num(ep.VT) << '\n';
  out << "payoff = " << num(ep.payoff) << '\n';
  out << "error = " << num(ep.error) << '\n';
  return kExitOk;
}

int cmd_check_aip(const RunConfig& c, std::ostream& out) {
  auto model = build_model(c);
  auto g = gamma_recursion(model);
  const std::size_t T = model.horizon();
  for (std::size_t t = T + 1; t-- > 0;) {
    out << "Gamma[" << t << "] = " << list(g.gamma[t]);
    if (t < T) {
      const auto& s = g.steps[t];
      out << "  step " << t << ": " << to_string(s.cost_case) << " alpha1=" << num(s.alpha1)
          << " betaN=" << num(s.betaN);
    }
    out << '\n';
    if (g.failing_step && *g.failing_step == t) break;
  }
  if (g.holds) {
    out << "AIP holds\n";
    return kExitOk;
  }
  out << "AIP violated at step " << *g.failing_step << '\n';
  return kExitAip;
}

int cmd_oracle_check(const RunConfig& c, std::ostream& out) {
  GridSpec grid;
  if (c.grid_step) grid.step = *c.grid_step;
  if (c.grid_rounds) grid.rounds = *c.grid_rounds;

  std::vector<OneStepInstance> instances;
  if (c.random > 0) {
    std::mt19937_64 rng(c.seed);
    for (std::size_t i = 0; i < c.random; ++i) instances.push_back(random_instance(rng));
  } else {
    auto model = build_model(c);
    auto payoff = build_payoff(c);
    auto sys = PayoffSystem::terminal(payoff, model.horizon());
    for (std::size_t t = model.horizon(); t-- > 1;) {
      sys = backward_step(sys, model.alpha[t], model.beta[t], model.kappa[t]);
    }
    instances.push_back({sys, model.alpha[0], model.beta[0], model.kappa[0], c.phi_prev,
                         model.spot});
  }

  out << "instance,closed_form,grid,dual,barphi,max_discrepancy\n";
  double worst = 0.0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& in = instances[i];
    double closed = evaluate_price(backward_step(in.system, in.alpha, in.beta, in.kappa),
                                   in.phi_prev, in.S_prev);
    double gp = grid_price(in.system, in.phi_prev, in.S_prev, in.alpha, in.beta, in.kappa, grid);
    double dp = dual_price(in.system, in.phi_prev, in.S_prev, in.alpha, in.beta, in.kappa);
    double bp = barphi_price(in.system, in.phi_prev, in.S_prev, in.alpha, in.beta, in.kappa,
                             in.S_prev);
    double vals[] = {closed, gp, dp, bp};
    double lo = *std::min_element(std::begin(vals), std::end(vals));
    double hi = *std::max_element(std::begin(vals), std::end(vals));
    double gap = hi - lo;
    if (std::isnan(gap)) gap = kInf;
    worst = std::max(worst, gap);
    out << i << ',' << num(closed) << ',' << num(gp) << ',' << num(dp) << ',' << num(bp) << ','
        << num(gap) << '\n';
  }
  out << "max discrepancy = " << num(worst) << " (tolerance " << num(c.tol) << ")\n";
  return worst <= c.tol ? kExitOk : kExitValidation;
}

int cmd_backtest(const RunConfig& c, std::ostream& out) {
  BacktestConfig cfg;
  cfg.calibration.window_weeks = c.window;
  cfg.max_eval_weeks = c.weeks;
  cfg.threads = c.threads;
  cfg.kappas = c.kappas.empty() ? default_kappa_grid() : parse_numbers(c.kappas, "--kappas");
  for (double k : cfg.kappas) {
    if (!(k >= 0.0 && k < 1.0)) throw ValidationError("--kappas values must lie in [0,1)");
  }
  PriceSeries series;
  if (!c.data.empty() && c.synthetic > 0) {
    throw ValidationError("--data and --synthetic are mutually exclusive");
  }
  if (!c.data.empty()) {
    series = load_prices(std::filesystem::path(c.data));
  } else if (c.synthetic > 0) {
    series = synthetic_series(c.synthetic, c.seed);
  } else {
    throw ValidationError("backtest needs --data FILE or --synthetic WEEKS");
  }
  auto result = run_backtest(series, cfg);
  emit_report(result.report, result.episodes, c.out_dir);
  const auto& rep = result.report;
  out << "kappa_pct,episodes,mean_error_pct,std_error_pct,v0_over_s0_pct,prob_error_nonneg\n";
  for (const auto& r : rep.rows) {
    out << num(100 * r.kappa) << ',' << r.episodes << ',' << num(100 * r.mean_error) << ','
        << num(100 * r.std_error) << ',' << num(100 * r.mean_v0) << ',' << num(r.prob_nonneg)
        << '\n';
  }
  out << "weeks evaluated = " << rep.evaluated_weeks << ", skipped = " << rep.skipped_weeks
      << ", AIP failures = " << rep.aip_failures << '\n';
  out << "support violation rate = " << num(rep.support_violation_rate) << '\n';
  out << "V0/S0 fit: slope = " << num(rep.v0_fit.slope)
      << ", intercept = " << num(rep.v0_fit.intercept) << '\n';
  out << "reports written to " << c.out_dir << '\n';
  return kExitOk;
}

void add_model_options(CLI::App* sub, RunConfig& c) {
  auto* model = sub->add_option("--model", c.model_file, "JSON model file");
  for (auto* o : {sub->add_option("--alpha", c.alpha, "lower ratio bound for every step"),
                  sub->add_option("--beta", c.beta, "upper ratio bound for every step"),
                  sub->add_option("--kappa", c.kappa, "cost rate for every step (fraction)"),
                  sub->add_option("--spot", c.spot, "initial price S0"),
                  sub->add_option("--steps", c.steps, "number of steps T")}) {
    o->excludes(model);
  }
}

void add_payoff_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--call", c.call, "call strike");
  sub->add_option("--put", c.put, "put strike");
  sub->add_option("--pwl", c.pwl, "convex payoff through points \"x0:y0,x1:y1,...\"");
  sub->add_option("--payoff", c.payoff, "named payoff (zero)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Super-hedging prices and strategies under proportional transaction costs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "superhedge 0.1.0");

  auto* price = app.add_subcommand("price", "minimal super-hedging price p0 and payoff systems");
  add_model_options(price, c);
  add_payoff_options(price, c);

  auto* hedge = app.add_subcommand("hedge", "run the optimal strategy along a price path");
  add_model_options(hedge, c);
  add_payoff_options(hedge, c);
  hedge->add_option("--path", c.path, "prices S0,S1,...,ST")->required();

  auto* aip = app.add_subcommand("check-aip", "distortion sets per date and AIP verdict");
  add_model_options(aip, c);

  auto* oracle = app.add_subcommand("oracle-check", "compare closed-form and oracle prices");
  add_model_options(oracle, c);
  add_payoff_options(oracle, c);
  oracle->add_option("--random", c.random, "number of random one-step instances");
  oracle->add_option("--seed", c.seed, "random seed");
  oracle->add_option("--phi-prev", c.phi_prev, "previous position for the model instance");
  oracle->add_option("--tol", c.tol, "largest accepted discrepancy");
  oracle->add_option("--grid-step", c.grid_step, "coarse grid step");
  oracle->add_option("--grid-rounds", c.grid_rounds, "grid refinement rounds");

  auto* bt = app.add_subcommand("backtest", "weekly at-the-money call backtest");
  bt->add_option("--data", c.data, "CSV with date and close columns");
  bt->add_option("--synthetic", c.synthetic, "use a synthetic in-support corpus of N weeks");
  bt->add_option("--seed", c.seed, "seed for --synthetic");
  bt->add_option("--kappas", c.kappas, "cost rates as fractions, e.g. 0.002,0.004");
  bt->add_option("--window", c.window, "calibration window in weeks");
  bt->add_option("--weeks", c.weeks, "evaluation weeks (0 = all)");
  bt->add_option("--threads", c.threads, "worker threads (0 = SUPERHEDGE_THREADS or all cores)");
  bt->add_option("--out", c.out_dir, "output directory");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*price) return cmd_price(c, out);
    if (*hedge) return cmd_hedge(c, out);
    if (*aip) return cmd_check_aip(c, out);
    if (*oracle) return cmd_oracle_check(c, out);
    if (*bt) return cmd_backtest(c, out);
  } catch (const AipViolation& e) {
    err << "error: AIP violated at step " << e.step() << ": " << e.what() << '\n';
    return kExitAip;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace superhedge
