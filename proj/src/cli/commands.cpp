#include "flashopt/cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "flashopt/analytics/usage.hpp"
#include "flashopt/atomicity/sweep.hpp"
#include "flashopt/composer/builtin_vectors.hpp"
#include "flashopt/composer/vector_io.hpp"
#include "flashopt/models/scenario_io.hpp"
#include "flashopt/opt/grid_oracle.hpp"
#include "flashopt/opt/solver.hpp"

namespace flashopt::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// A path that exists wins; otherwise a bundled file data/<dir>/<name>[.ext].
fs::path resolve_input(const std::string& arg, const char* dir, const char* ext) {
  if (arg.empty()) throw UsageError(std::string("missing input for ") + dir);
  if (fs::exists(arg)) return arg;
  for (const auto& candidate : {arg, arg + ext}) {
    const fs::path p = models::data_dir() / dir / candidate;
    if (fs::exists(p)) return p;
  }
  throw ParseError("cannot open '" + arg + "'");
}

struct ReferencePoint {
  std::string label;
  Vector params;
  std::optional<double> objective;
};

struct Loaded {
  models::Scenario scenario;
  composer::AttackVector vector;
  std::string vector_id;
  std::vector<ReferencePoint> references;
  std::string scenario_hash;
  json config;
};

std::pair<std::string, double> parse_upper(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("--upper expects NAME=VALUE, got '" + spec + "'");
  const std::string num = spec.substr(eq + 1);
  try {
    std::size_t used = 0;
    const double value = std::stod(num, &used);
    if (used != num.size() || !std::isfinite(value)) throw std::invalid_argument(num);
    return {spec.substr(0, eq), value};
  } catch (const std::exception&) {
    throw UsageError("--upper: malformed value in '" + spec + "'");
  }
}

Loaded load_inputs(const VectorArgs& args) {
  Loaded l;
  const fs::path sp = resolve_input(args.scenario, "scenarios", ".json");
  const json doc = models::parse_json_text(models::read_text_file(sp), sp.string());
  l.scenario = models::scenario_from_json(doc);
  l.scenario_hash = hex64(fnv1a64(models::scenario_to_json(l.scenario).dump()));

  if (args.vector.empty()) throw UsageError("missing --vector");
  composer::BuiltinOptions opts;
  opts.debt_cap = composer::debt_cap_mode_from_name(args.debt_cap);
  std::set<std::string> extra_ignored;
  for (const auto& sym : args.ignore) {
    if (sym == "zY") {
      opts.debt_cap = composer::DebtCapMode::ignored;
    } else {
      extra_ignored.insert(sym);
    }
  }
  json upper = json::object();
  for (const auto& spec : args.upper) {
    const auto [name, value] = parse_upper(spec);
    opts.upper[name] = value;
    upper[name] = value;
  }

  const auto names = composer::builtin_vector_names();
  const bool builtin = std::find(names.begin(), names.end(), args.vector) != names.end();
  if (builtin) {
    l.vector = composer::build_builtin_vector(args.vector, l.scenario, opts);
    l.vector_id = args.vector;
    if (!extra_ignored.empty()) l.vector.closed_form = nullptr;
  } else {
    l.vector = composer::load_vector(args.vector);
    l.vector_id = l.vector.name;
    if (opts.debt_cap == composer::DebtCapMode::ignored) extra_ignored.insert("zY");
    for (const auto& [name, value] : opts.upper) {
      auto it = std::find_if(l.vector.params.begin(), l.vector.params.end(),
                             [&](const composer::ParamSpec& p) { return p.name == name; });
      if (it == l.vector.params.end()) throw ConfigError("vector has no parameter '" + name + "'");
      if (value < it->lower) throw ConfigError("upper bound for " + name + " is below its lower bound");
      it->upper = value;
    }
  }
  l.vector.ignored.insert(extra_ignored.begin(), extra_ignored.end());
  l.vector.validate();

  if (doc.contains("reference_points")) {
    for (const auto& r : doc["reference_points"]) {
      if (r.value("vector", std::string()) != l.vector_id) continue;
      ReferencePoint p;
      p.label = r.value("label", std::string("reference"));
      const auto values = r.at("params").get<std::vector<double>>();
      p.params = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
      if (r.contains("objective")) p.objective = r["objective"].get<double>();
      if (p.params.size() == l.vector.n_params()) l.references.push_back(p);
    }
  }

  std::vector<std::string> ignored(l.vector.ignored.begin(), l.vector.ignored.end());
  l.config = {{"scenario", l.scenario.name},
              {"vector", l.vector_id},
              {"debt_cap", composer::debt_cap_mode_name(opts.debt_cap)},
              {"ignored", ignored},
              {"upper", upper}};
  return l;
}

json params_json(const composer::AttackVector& v, const Vector& x) {
  json j = json::object();
  for (int k = 0; k < v.n_params(); ++k) j[v.params[k].name] = x(k);
  return j;
}

std::string params_text(const composer::AttackVector& v, const Vector& x) {
  std::string s;
  for (int k = 0; k < v.n_params(); ++k) {
    if (k) s += ' ';
    s += v.params[k].name + "=" + fixed(x(k), 4);
  }
  return s;
}

json final_state_json(const composer::AttackVector& v, const models::WorldState& s) {
  json balances = json::object();
  for (const auto& asset : s.assets()) balances[asset] = s.balance(v.trader, asset);
  json positions = json::object();
  for (const auto& [id, pool] : s.pools()) {
    if (const auto* lp = std::get_if<models::LendingPool>(&pool)) {
      Scalar debt = 0.0, collateral = 0.0;
      for (const auto& pos : lp->positions) {
        if (pos.trader != v.trader) continue;
        debt += pos.debt;
        collateral += pos.collateral;
      }
      if (debt != 0.0 || collateral != 0.0) {
        positions[id] = {{"collateral", collateral}, {"debt", debt}};
      }
    }
  }
  return {{"balances", balances}, {"positions", positions}};
}

void check_format(const GlobalArgs& g) { (void)format_from_name(g.format); }

json config_base(const GlobalArgs& g, const char* command) {
  return {{"command", command}, {"seed", g.seed}, {"strict", g.strict}};
}

models::ExecutionMode mode_of(const GlobalArgs& g) {
  return g.strict ? models::ExecutionMode::strict : models::ExecutionMode::relaxed;
}

// --- optimize ----------------------------------------------------------------

json result_json(const composer::AttackVector& v, const opt::OptimizationResult& r) {
  std::vector<std::string> active;
  for (int k : r.active) active.push_back(r.constraint_names[static_cast<std::size_t>(k)]);
  return {{"status", r.status},
          {"feasible", r.feasible},
          {"params", params_json(v, r.best_params)},
          {"objective", r.best_objective},
          {"min_scaled_residual", r.max_violation},
          {"active", active},
          {"iterations", r.iterations},
          {"starts", r.starts_tried},
          {"method", r.method},
          {"closed_form", r.closed_form}};
}

int default_grid_resolution(int n) {
  switch (n) {
    case 1: return 2000;
    case 2: return 200;
    default: return 60;
  }
}

}  // namespace

RunReport cmd_optimize(const GlobalArgs& g, const VectorArgs& va, const SolverArgs& sa) {
  check_format(g);
  const auto t0 = Clock::now();
  Loaded l = load_inputs(va);
  const auto& v = l.vector;
  const auto& s0 = l.scenario.state;

  opt::SolverConfig sc;
  sc.max_iterations = sa.max_iter;
  sc.tolerance = sa.tol;
  sc.fd_step = sa.fd_step;
  sc.starts = sa.starts;
  sc.seed = g.seed;
  sc.threads = sa.threads;
  sc.method = opt::method_from_name(sa.method);
  sc.use_closed_form = !sa.trace_only;
  sc.validate();
  if (sa.grid_tol < 0.0) throw ConfigError("--grid-tol must be >= 0");
  if (sa.grid_res < 0 || sa.grid_res == 1) throw ConfigError("--grid-res must be >= 2");

  const bool run_grid = !sa.no_grid && v.n_params() <= 3;
  const int grid_res = sa.grid_res > 0 ? sa.grid_res : default_grid_resolution(v.n_params());

  RunReport rep;
  rep.command = g.echo;
  rep.scenario_hash = l.scenario_hash;
  rep.config = config_base(g, "optimize");
  rep.config.update(l.config);
  rep.config["solver"] = {{"max_iter", sc.max_iterations}, {"tol", sc.tolerance},
                          {"fd_step", sc.fd_step},         {"starts", sc.starts},
                          {"method", opt::method_name(sc.method)},
                          {"closed_form", sc.use_closed_form}};
  rep.config["grid"] = run_grid ? json{{"resolution", grid_res}, {"tolerance", sa.grid_tol}}
                                : json(nullptr);

  const auto ts = Clock::now();
  const opt::OptimizationResult best = opt::solve(v, s0, sc);
  rep.timing["solve_s"] = seconds_since(ts);

  json solve_j = result_json(v, best);
  json constraints = json::array();
  for (std::size_t k = 0; k < best.constraint_names.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const bool act = std::find(best.active.begin(), best.active.end(), static_cast<int>(k)) !=
                     best.active.end();
    constraints.push_back({{"name", best.constraint_names[k]},
                           {"value", best.constraints(i)},
                           {"scale", best.scales(i)},
                           {"scaled", best.constraints(i) / best.scales(i)},
                           {"active", act}});
  }
  solve_j["constraints"] = constraints;
  solve_j["final_state"] = final_state_json(v, composer::evaluate(v, s0, best.best_params).states.back());
  rep.results["solve"] = solve_j;

  if (!best.feasible) {
    rep.exit_code = 1;
    rep.notes.push_back("no feasible point found (smallest scaled residual " +
                        fixed(best.max_violation, 8) + ")");
  }
  if (g.strict && best.feasible) {
    try {
      composer::evaluate(v, s0, best.best_params, models::ExecutionMode::strict);
    } catch (const ConstraintViolation& e) {
      rep.exit_code = 1;
      rep.notes.push_back(std::string("strict replay of the solution failed: ") + e.what());
    }
  }

  std::optional<opt::OptimizationResult> grid;
  if (run_grid) {
    opt::GridConfig gc;
    gc.resolution = grid_res;
    gc.threads = sa.threads;
    gc.use_closed_form = sc.use_closed_form;
    const auto tg = Clock::now();
    grid = opt::grid_oracle(v, s0, gc);
    rep.timing["grid_s"] = seconds_since(tg);
    json gj = result_json(v, *grid);
    gj["resolution"] = grid_res;
    rep.results["grid"] = gj;
    if (grid->feasible && best.feasible) {
      const double gap =
          (grid->best_objective - best.best_objective) / std::max(1.0, std::abs(grid->best_objective));
      const bool agree = std::abs(gap) <= sa.grid_tol;
      rep.results["agreement"] = {{"relative_gap", gap}, {"tolerance", sa.grid_tol}, {"agree", agree}};
      if (!agree) {
        rep.notes.push_back("solver and grid disagree: grid objective " +
                            fixed(grid->best_objective) + " vs solver " +
                            fixed(best.best_objective) + " (relative gap " + fixed(100 * gap, 3) +
                            "%)");
      }
    } else {
      rep.results["agreement"] = nullptr;
    }
  } else if (!sa.no_grid) {
    rep.notes.push_back("grid check skipped: more than three parameters");
  }

  // Reference points carried by the scenario file.
  json refs = json::array();
  const Vector lo = v.lower_bounds(), hi = v.upper_bounds();
  for (const auto& ref : l.references) {
    json rj{{"label", ref.label}, {"params", params_json(v, ref.params)}};
    if (ref.objective) rj["reported_objective"] = *ref.objective;
    try {
      const auto trace = composer::evaluate(v, s0, ref.params);
      rj["objective"] = trace.objective;
      json violated = json::array();
      for (const auto& tr : trace.residuals) {
        if (!tr.exported) continue;
        const double scaled = tr.residual.scaled();
        if (scaled < -1e-6) {
          violated.push_back({{"name", tr.residual.key}, {"symbol", tr.residual.symbol},
                              {"value", tr.residual.value}, {"scaled", scaled}});
          rep.notes.push_back("reference point '" + ref.label + "' violates " + tr.residual.key +
                              " (" + tr.residual.symbol + ") by " + fixed(-tr.residual.value, 4) +
                              ", " + fixed(-100.0 * scaled, 2) +
                              "% of its limit; its objective is not attainable under the "
                              "enforced constraints");
        }
      }
      bool in_box = true;
      for (int k = 0; k < v.n_params(); ++k) {
        in_box = in_box && ref.params(k) >= lo(k) && ref.params(k) <= hi(k);
      }
      if (!in_box) {
        rep.notes.push_back("reference point '" + ref.label + "' lies outside the parameter box");
      }
      rj["violated"] = violated;
      rj["in_box"] = in_box;
      const bool feasible = violated.empty() && in_box;
      rj["feasible"] = feasible;
      if (ref.objective && std::abs(trace.objective - *ref.objective) >
                               0.005 * std::max(1.0, std::abs(*ref.objective))) {
        rep.notes.push_back("reference point '" + ref.label + "' evaluates to " +
                            fixed(trace.objective) + ", reported " + fixed(*ref.objective));
      }
      if (feasible && best.feasible && trace.objective > best.best_objective * (1 + 1e-6) + 1e-9) {
        rep.notes.push_back("reference point '" + ref.label + "' beats the solver: " +
                            fixed(trace.objective) + " vs " + fixed(best.best_objective));
      }
      if (!feasible && ref.objective && best.feasible &&
          best.best_objective > *ref.objective * 1.005) {
        rep.notes.push_back("solver optimum " + fixed(best.best_objective) +
                            " exceeds the reported objective of infeasible reference point '" +
                            ref.label + "'");
      }
    } catch (const std::exception& e) {
      rj["error"] = e.what();
      rep.notes.push_back("reference point '" + ref.label + "' could not be evaluated: " + e.what());
    }
    refs.push_back(rj);
  }
  rep.results["reference_points"] = refs;
  rep.timing["total_s"] = seconds_since(t0);

  // text
  std::ostringstream t;
  t << "optimize " << l.vector_id << " on " << l.scenario.name << "  (" << v.n_params()
    << " parameters, " << best.constraint_names.size() << " constraints, "
    << (best.closed_form ? "closed form" : "trace") << ")\n";
  t << "solve   " << std::left << std::setw(11) << best.status << std::right << " objective "
    << std::setw(14) << fixed(best.best_objective) << "  " << params_text(v, best.best_params)
    << "  [" << best.method << ", " << best.starts_tried << " starts, " << best.iterations
    << " iterations]\n";
  if (grid) {
    t << "grid    " << std::left << std::setw(11) << grid->status << std::right << " objective "
      << std::setw(14) << fixed(grid->best_objective) << "  " << params_text(v, grid->best_params)
      << "  [" << grid_res << " per axis]\n";
  }
  t << "constraints at the solution:\n";
  for (const auto& c : constraints) {
    t << "  " << std::left << std::setw(22) << c["name"].get<std::string>() << std::right
      << std::setw(16) << fixed(c["value"].get<double>()) << std::setw(14)
      << fixed(c["scaled"].get<double>(), 6) << (c["active"].get<bool>() ? "  active" : "")
      << (c["scaled"].get<double>() < -1e-6 ? "  VIOLATED" : "") << '\n';
  }
  for (const auto& r : refs) {
    t << "reference '" << r["label"].get<std::string>() << "'  "
      << params_text(v, l.references[static_cast<std::size_t>(&r - &refs[0])].params);
    if (r.contains("objective")) t << "  objective " << fixed(r["objective"].get<double>());
    if (r.contains("feasible")) t << (r["feasible"].get<bool>() ? "  feasible" : "  infeasible");
    t << '\n';
  }
  rep.text = t.str();

  std::ostringstream c;
  c << std::setprecision(12) << "section,name,value\n";
  c << "solve,status," << best.status << '\n' << "solve,objective," << best.best_objective << '\n';
  for (int k = 0; k < v.n_params(); ++k) c << "solve," << v.params[k].name << ',' << best.best_params(k) << '\n';
  if (grid) {
    c << "grid,status," << grid->status << '\n' << "grid,objective," << grid->best_objective << '\n';
    for (int k = 0; k < v.n_params(); ++k) c << "grid," << v.params[k].name << ',' << grid->best_params(k) << '\n';
  }
  for (const auto& cj : constraints) {
    c << "constraint," << cj["name"].get<std::string>() << ',' << cj["value"].get<double>() << '\n';
  }
  rep.csv = c.str();
  return rep;
}

RunReport cmd_evaluate(const GlobalArgs& g, const VectorArgs& va, const std::vector<double>& params) {
  check_format(g);
  const auto t0 = Clock::now();
  Loaded l = load_inputs(va);
  const auto& v = l.vector;
  if (static_cast<int>(params.size()) != v.n_params()) {
    throw UsageError("vector " + l.vector_id + " takes " + std::to_string(v.n_params()) +
                     " parameters, got " + std::to_string(params.size()));
  }
  const Vector x = Eigen::Map<const Vector>(params.data(), static_cast<Eigen::Index>(params.size()));

  RunReport rep;
  rep.command = g.echo;
  rep.scenario_hash = l.scenario_hash;
  rep.config = config_base(g, "evaluate");
  rep.config.update(l.config);
  rep.config["params"] = params;

  composer::EvaluationTrace trace;
  try {
    trace = composer::evaluate(v, l.scenario.state, x, mode_of(g));
  } catch (const ConstraintViolation& e) {
    rep.exit_code = 1;
    rep.results = {{"error", e.what()}, {"residual", e.residual()}};
    rep.text = std::string("strict execution stopped: ") + e.what() + '\n';
    rep.csv = "error\n\"" + std::string(e.what()) + "\"\n";
    rep.timing["total_s"] = seconds_since(t0);
    return rep;
  }

  const auto& assets = l.scenario.state.assets();
  json steps = json::array();
  std::ostringstream t, c;
  c << std::setprecision(12) << "step,label,kind,name,value,scaled,constraint\n";
  t << "evaluate " << l.vector_id << " on " << l.scenario.name << "  " << params_text(v, x) << '\n';
  t << std::left << std::setw(6) << "state" << std::setw(28) << "after";
  for (const auto& a : assets) t << std::right << std::setw(16) << a;
  t << '\n';
  bool violated = false;
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    const auto& s = trace.states[k];
    const std::string label = k == 0 ? "initial" : v.steps[k - 1].label;
    json balances = json::object();
    t << std::left << std::setw(6) << ("S" + std::to_string(k)) << std::setw(28) << label;
    for (const auto& a : assets) {
      const double b = s.balance(v.trader, a);
      balances[a] = b;
      t << std::right << std::setw(16) << fixed(b);
      c << k << ",\"" << label << "\",balance," << a << ',' << b << ",,\n";
    }
    t << '\n';
    json residuals = json::array();
    for (const auto& tr : trace.residuals) {
      if (static_cast<std::size_t>(tr.step) != k) continue;
      const auto& r = tr.residual;
      const bool negative = r.scaled() < -1e-6;
      if (negative && tr.exported) violated = true;
      residuals.push_back({{"name", r.key}, {"symbol", r.symbol}, {"description", r.description},
                           {"value", r.value}, {"scaled", r.scaled()},
                           {"constraint", tr.exported}, {"negative", negative}});
      t << "      " << (negative ? "!! " : "   ") << std::left << std::setw(20) << r.key
        << std::setw(6) << r.symbol << std::right << std::setw(16) << fixed(r.value)
        << (tr.exported ? "  constraint" : "  info") << "  " << r.description
        << (negative ? "  NEGATIVE" : "") << '\n';
      c << k << ",\"" << label << "\",residual," << r.key << ',' << r.value << ',' << r.scaled()
        << ',' << (tr.exported ? 1 : 0) << '\n';
    }
    steps.push_back({{"state", k}, {"label", label}, {"balances", balances}, {"residuals", residuals}});
  }
  t << "objective " << fixed(trace.objective) << ' ' << v.objective.asset << '\n';
  c << ",,objective," << v.objective.asset << ',' << trace.objective << ",,\n";
  if (violated) {
    rep.exit_code = 1;
    rep.notes.push_back("parameters violate at least one constraint");
  }
  rep.results = {{"steps", steps}, {"objective", trace.objective}, {"feasible", !violated},
                 {"final_state", final_state_json(v, trace.states.back())}};
  rep.text = t.str();
  rep.csv = c.str();
  rep.timing["total_s"] = seconds_since(t0);
  return rep;
}

RunReport cmd_atomicity(const GlobalArgs& g, const AtomicityArgs& a) {
  check_format(g);
  const auto t0 = Clock::now();
  const fs::path mp = resolve_input(a.market, "markets", ".json");
  const atomicity::TwoExchangeMarket market = atomicity::load_market(mp);
  if (a.trials < 1) throw ConfigError("--trials must be >= 1");
  if (a.bootstrap < 1) throw ConfigError("--bootstrap must be >= 1");
  if (a.budget < 0.0 || !std::isfinite(a.budget)) throw ConfigError("--budget must be >= 0");

  const double budget = a.budget > 0.0 ? a.budget : atomicity::optimal_budget(market);
  if (!(budget > 0.0)) throw ConfigError("market has no profitable price gap; pass --budget");

  atomicity::StreamFactory streams;
  json stream_cfg;
  if (!a.trace.empty()) {
    streams = atomicity::replay_factory(atomicity::TradeStream::replay_file(a.trace, market));
    stream_cfg = {{"kind", "replay"},
                  {"trace_hash", hex64(fnv1a64(models::read_text_file(a.trace)))}};
  } else {
    atomicity::SyntheticParams sp;
    sp.log_mean = a.log_mean;
    sp.log_sd = a.log_sd;
    sp.neutral = a.neutral;
    streams = atomicity::synthetic_factory(market, sp, g.seed);
    stream_cfg = {{"kind", "synthetic"}, {"log_mean", a.log_mean}, {"log_sd", a.log_sd},
                  {"neutral", a.neutral}};
  }

  atomicity::SweepConfig cfg;
  cfg.i_values = a.i_values;
  cfg.trials = a.trials;
  cfg.bootstrap_samples = a.bootstrap;
  cfg.seed = g.seed;
  const auto rows = atomicity::sweep(market, budget, streams, cfg);
  const auto atomic = atomicity::atomic_arbitrage(market, budget);

  RunReport rep;
  rep.command = g.echo;
  rep.scenario_hash = hex64(fnv1a64(models::read_text_file(mp)));
  rep.config = config_base(g, "atomicity");
  rep.config["stream"] = stream_cfg;
  rep.config["i"] = a.i_values;
  rep.config["trials"] = a.trials;
  rep.config["bootstrap"] = a.bootstrap;
  rep.config["budget"] = a.budget;

  json jr = json::array();
  std::ostringstream t;
  t << "atomic arbitrage: budget " << fixed(budget) << " " << market.a.asset_x << ", buy on "
    << (atomic.buy_exchange == 0 ? market.id_a : market.id_b) << ", profit " << fixed(atomic.aarb, 6)
    << "\n";
  t << std::setw(8) << "i" << std::setw(16) << "mean diff" << std::setw(16) << "ci low"
    << std::setw(16) << "ci high" << std::setw(14) << "ci width" << std::setw(8) << "trials\n";
  for (const auto& r : rows) {
    jr.push_back({{"i", r.i}, {"mean", r.mean}, {"ci_low", r.ci_low}, {"ci_high", r.ci_high},
                  {"trials", r.trials}});
    t << std::setw(8) << r.i << std::setw(16) << fixed(r.mean, 6) << std::setw(16)
      << fixed(r.ci_low, 6) << std::setw(16) << fixed(r.ci_high, 6) << std::setw(14)
      << fixed(r.ci_high - r.ci_low, 6) << std::setw(7) << r.trials << '\n';
  }
  rep.results = {{"budget", budget},
                 {"atomic_profit", atomic.aarb},
                 {"buy_exchange", atomic.buy_exchange == 0 ? market.id_a : market.id_b},
                 {"rows", jr}};
  rep.text = t.str();
  std::ostringstream c;
  atomicity::write_sweep_csv(c, rows);
  rep.csv = c.str();
  rep.timing["total_s"] = seconds_since(t0);
  return rep;
}

RunReport cmd_classify(const GlobalArgs& g, const ClassifyArgs& ca, std::istream& in) {
  check_format(g);
  const auto t0 = Clock::now();
  if (ca.min_count < 1) throw ConfigError("--min-count must be >= 1");
  const analytics::AddressMap map =
      ca.map.empty() ? analytics::AddressMap::bundled() : analytics::AddressMap::load(ca.map);
  const analytics::PriceTable prices =
      ca.prices.empty() ? analytics::PriceTable::defaults() : analytics::PriceTable::load(ca.prices);

  std::string text;
  if (ca.input.empty()) {
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  } else {
    text = models::read_text_file(ca.input);
  }
  std::istringstream records_in(text);
  const auto batch = analytics::read_records(records_in, ca.input.empty() ? "stdin" : ca.input);

  analytics::UsageAccumulator acc;
  int n = 0;
  for (const auto& r : batch.records) acc.add(r, map, prices, ++n);
  analytics::UsageTable table = acc.table(ca.min_count);
  table.errors.insert(table.errors.begin(), batch.errors.begin(), batch.errors.end());

  RunReport rep;
  rep.command = g.echo;
  rep.scenario_hash = hex64(fnv1a64(text));
  rep.config = config_base(g, "classify");
  rep.config["min_count"] = ca.min_count;
  rep.config["map_entries"] = map.size();
  rep.config["custom_prices"] = !ca.prices.empty();

  auto row_json = [](const analytics::UsageRow& r) {
    return json{{"platforms", r.label}, {"transactions", r.count}, {"amount_usd", r.usd},
                {"unpriced", r.unpriced}, {"gas_mean", r.gas.mean},
                {"gas_std", r.gas.population_std()}};
  };
  json rows = json::array();
  for (const auto& r : table.rows) rows.push_back(row_json(r));
  json errors = json::array();
  for (const auto& e : table.errors) {
    errors.push_back({{"line", e.line}, {"tx", e.tx}, {"message", e.message}});
  }
  rep.results = {{"rows", rows}, {"others", row_json(table.others)},
                 {"totals", row_json(table.totals)}, {"skipped", errors}};
  std::ostringstream t, c;
  analytics::write_usage_text(t, table);
  analytics::write_usage_csv(c, table);
  rep.text = t.str();
  rep.csv = c.str();
  rep.timing["total_s"] = seconds_since(t0);
  return rep;
}

RunReport cmd_describe(const GlobalArgs& g, const VectorArgs& va) {
  check_format(g);
  Loaded l = load_inputs(va);
  const auto& v = l.vector;
  const auto& s0 = l.scenario.state;

  RunReport rep;
  rep.command = g.echo;
  rep.scenario_hash = l.scenario_hash;
  rep.config = config_base(g, "describe");
  rep.config.update(l.config);

  std::ostringstream t, c;
  c << std::setprecision(12) << "kind,step,name,detail,linear,scale\n";
  t << "vector " << l.vector_id << " on " << l.scenario.name << ", trader " << v.trader
    << ", objective " << v.objective.entity << "/" << v.objective.asset << '\n';
  json params = json::array();
  t << "parameters:\n";
  for (const auto& p : v.params) {
    params.push_back({{"name", p.name}, {"lower", p.lower}, {"upper", p.upper}});
    t << "  " << p.name << " in [" << fixed(p.lower) << ", " << fixed(p.upper) << "]\n";
    c << "param,0," << p.name << ",\"[" << p.lower << "," << p.upper << "]\",,\n";
  }
  json steps = json::array();
  t << "steps:\n";
  for (std::size_t k = 0; k < v.steps.size(); ++k) {
    json calls = json::array();
    t << "  T" << k + 1 << " " << v.steps[k].label << '\n';
    for (const auto& call : v.steps[k].calls) {
      const std::string amount = call.amount ? composer::describe_binding(*call.amount) : "-";
      calls.push_back({{"endpoint", composer::endpoint_name(call.endpoint)}, {"pool", call.pool},
                       {"amount", amount}, {"exported", call.exported}});
      t << "     " << composer::endpoint_name(call.endpoint) << "(" << call.pool << ", " << amount
        << ")\n";
      c << "call," << k + 1 << ',' << composer::endpoint_name(call.endpoint) << ",\"" << call.pool
        << " " << amount << "\",,\n";
    }
    steps.push_back({{"label", v.steps[k].label}, {"calls", calls}});
  }
  json cons = json::array();
  t << "constraints:\n";
  for (const auto& d : composer::list_constraints(v, s0)) {
    cons.push_back({{"step", d.step}, {"key", d.key}, {"symbol", d.symbol},
                    {"description", d.description}, {"linear", d.linear}, {"scale", d.scale}});
    t << "  " << (d.step == 0 ? std::string("bound") : "T" + std::to_string(d.step)) << "  "
      << std::left << std::setw(22) << d.key << std::setw(10) << (d.linear ? "linear" : "nonlinear")
      << std::right << "  " << d.description << '\n';
    c << "constraint," << d.step << ',' << d.key << ",\"" << d.description << "\","
      << (d.linear ? 1 : 0) << ',' << d.scale << '\n';
  }
  const bool cf = opt::uses_closed_form(v, s0);
  t << "closed form: " << (cf ? "yes" : "no") << '\n';
  rep.results = {{"params", params}, {"steps", steps}, {"constraints", cons}, {"closed_form", cf}};
  rep.text = t.str();
  rep.csv = c.str();
  return rep;
}

namespace {

std::string join_args(const std::vector<std::string>& args) {
  std::string s;
  for (const auto& a : args) {
    if (!s.empty()) s += ' ';
    s += a;
  }
  return s;
}

void add_vector_args(CLI::App* sub, VectorArgs& v, bool with_caps) {
  sub->add_option("--scenario", v.scenario, "scenario file or bundled name")->required();
  sub->add_option("--vector", v.vector, "built-in vector (paa, oracle) or vector file")->required();
  if (!with_caps) return;
  sub->add_option("--debt-cap", v.debt_cap, "residual, clamp or ignored");
  sub->add_option("--ignore-constraint", v.ignore, "drop residuals of this symbol (repeatable)");
  sub->add_option("--upper", v.upper, "NAME=VALUE upper bound override (repeatable)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        std::istream& in) {
  CLI::App app{"flash loan attack vector optimizer and DeFi usage tools", "flashopt"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalArgs g;
  g.echo = join_args(args);
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--format", g.format, "text, csv or structured")
      ->check(CLI::IsMember({"text", "csv", "structured"}));
  app.add_flag("--strict", g.strict, "abort on the first negative residual");

  VectorArgs ov, ev, dv;
  SolverArgs sa;
  auto* optimize = app.add_subcommand("optimize", "maximize a vector's objective");
  add_vector_args(optimize, ov, true);
  optimize->add_option("--max-iter", sa.max_iter);
  optimize->add_option("--tol", sa.tol);
  optimize->add_option("--fd-step", sa.fd_step);
  optimize->add_option("--starts", sa.starts);
  optimize->add_option("--grid-res", sa.grid_res);
  optimize->add_option("--grid-tol", sa.grid_tol);
  optimize->add_flag("--no-grid", sa.no_grid);
  optimize->add_option("--method", sa.method, "sqp or auglag");
  optimize->add_option("--threads", sa.threads);
  optimize->add_flag("--trace-only", sa.trace_only, "evaluate through the step trace only");

  std::vector<double> params;
  auto* evaluate = app.add_subcommand("evaluate", "print the trace of one parameter choice");
  add_vector_args(evaluate, ev, true);
  evaluate->add_option("--params", params, "comma separated values")->delimiter(',')->required();

  AtomicityArgs aa;
  auto* atom = app.add_subcommand("atomicity", "profit lost by splitting an arbitrage");
  atom->add_option("--market", aa.market)->required();
  atom->add_option("--trace", aa.trace, "replay file instead of a synthetic stream");
  atom->add_option("--i", aa.i_values, "intermediary counts")->delimiter(',');
  atom->add_option("--trials", aa.trials);
  atom->add_option("--budget", aa.budget);
  atom->add_option("--bootstrap", aa.bootstrap);
  atom->add_option("--log-mean", aa.log_mean);
  atom->add_option("--log-sd", aa.log_sd);
  atom->add_flag("--neutral", aa.neutral);

  ClassifyArgs ca;
  auto* classify = app.add_subcommand("classify", "aggregate flash loan records by platform");
  classify->add_option("--input", ca.input, "JSON lines; standard input when absent");
  classify->add_option("--map", ca.map, "address,project file");
  classify->add_option("--prices", ca.prices, "asset,price file");
  classify->add_option("--min-count", ca.min_count);

  auto* describe = app.add_subcommand("describe", "list a vector's steps and constraints");
  add_vector_args(describe, dv, true);

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    RunReport rep;
    if (*optimize) {
      rep = cmd_optimize(g, ov, sa);
    } else if (*evaluate) {
      rep = cmd_evaluate(g, ev, params);
    } else if (*atom) {
      rep = cmd_atomicity(g, aa);
    } else if (*classify) {
      rep = cmd_classify(g, ca, in);
    } else {
      rep = cmd_describe(g, dv);
    }
    out << rep.render(format_from_name(g.format));
    return rep.exit_code;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
  } catch (const composer::EvaluationError& e) {
    err << "evaluation error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "input error: " << e.what() << '\n';
  }
  return 2;
}

}  // namespace flashopt::cli
