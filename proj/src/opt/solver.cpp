#include "flashopt/opt/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

namespace flashopt::opt {

const char* method_name(Method m) { return m == Method::sqp ? "sqp" : "auglag"; }

Method method_from_name(const std::string& name) {
  if (name == "sqp") return Method::sqp;
  if (name == "auglag") return Method::auglag;
  throw ConfigError("unknown method '" + name + "' (sqp, auglag)");
}

void SolverConfig::validate() const {
  if (max_iterations < 1) throw ConfigError("max iterations must be >= 1");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be > 0");
  if (!(feasibility_tolerance > 0.0)) throw ConfigError("feasibility tolerance must be > 0");
  if (!(fd_step > 0.0) || fd_step >= 0.5) throw ConfigError("fd step must be in (0, 0.5)");
  if (starts < 1) throw ConfigError("starts must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

std::vector<Vector> latin_hypercube(int dim, int count, Rng& rng) {
  std::vector<Vector> pts(static_cast<std::size_t>(count), Vector(dim));
  std::vector<int> perm(static_cast<std::size_t>(count));
  for (int d = 0; d < dim; ++d) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = count - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    }
    for (int i = 0; i < count; ++i) {
      pts[i][d] = (perm[i] + rng.uniform()) / count;
    }
  }
  return pts;
}

namespace {

StartRecord run_start(const Problem& problem, const Vector& start, const SolverConfig& config) {
  LocalOptions opts;
  opts.max_iterations = config.max_iterations;
  opts.tolerance = config.tolerance;
  opts.feasibility_tolerance = config.feasibility_tolerance;
  opts.fd_step = config.fd_step;

  StartRecord rec;
  rec.start = start;
  LocalResult r;
  if (config.method == Method::sqp) {
    r = sqp_solve(problem, start, opts);
    rec.method = "sqp";
    if (r.qp_failed) {
      r = auglag_solve(problem, start, opts);
      rec.method = "sqp->auglag";
    }
  } else {
    r = auglag_solve(problem, start, opts);
    rec.method = "auglag";
  }
  rec.x = r.x;
  rec.objective = r.objective;
  rec.worst_scaled = r.worst_scaled;
  rec.iterations = r.iterations;
  rec.feasible = std::isfinite(r.objective) && r.worst_scaled >= -config.feasibility_tolerance;
  rec.status = r.status;
  return rec;
}

// Strict ordering used to pick the winner: feasible first, then objective,
// then smaller violation, then start index (by the caller's scan order).
bool better(const StartRecord& a, const StartRecord& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (a.feasible) return a.objective > b.objective;
  return a.worst_scaled > b.worst_scaled;
}

}  // namespace

OptimizationResult solve_problem(const Problem& problem, const SolverConfig& config) {
  config.validate();
  if (problem.n < 1) throw ConfigError("problem has no free parameters");
  if (!problem.lower.allFinite() || !problem.upper.allFinite()) {
    throw ConfigError("bounds must be finite");
  }
  const auto t0 = std::chrono::steady_clock::now();

  Rng rng(derive_seed(config.seed, 0));
  const auto unit = latin_hypercube(problem.n, config.starts, rng);
  std::vector<Vector> starts;
  for (const auto& u : unit) {
    starts.push_back(problem.lower + u.cwiseProduct(problem.upper - problem.lower));
  }

  std::vector<StartRecord> records(starts.size());
  const int workers = std::min<int>(config.threads, static_cast<int>(starts.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < starts.size(); ++i) records[i] = run_start(problem, starts[i], config);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (std::size_t i = next++; i < starts.size(); i = next++) {
          records[i] = run_start(problem, starts[i], config);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (better(records[i], records[best])) best = i;
  }

  OptimizationResult out;
  out.starts_tried = static_cast<int>(records.size());
  for (const auto& r : records) out.iterations += r.iterations;
  const StartRecord& win = records[best];
  out.feasible = win.feasible;
  out.status = win.feasible ? "optimal" : "infeasible";
  out.method = win.method;
  out.best_params = win.x;
  out.scales = problem.scales;
  out.constraint_names = problem.constraint_names;
  if (std::isfinite(win.objective)) {
    const ProblemValue v = problem(win.x);
    out.best_objective = v.objective;
    out.constraints = v.constraints;
    out.max_violation = problem.worst_scaled(v.constraints);
    for (int k = 0; k < problem.m; ++k) {
      if (std::abs(v.constraints[k] / problem.scales[k]) <= 1e-6) out.active.push_back(k);
    }
  } else {
    out.best_objective = -kInfinity;
    out.max_violation = -kInfinity;
  }
  out.starts = std::move(records);
  out.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

OptimizationResult solve(const composer::AttackVector& vector, const models::WorldState& scenario,
                         const SolverConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const Problem problem = make_problem(vector, scenario, config.use_closed_form);
  OptimizationResult out = solve_problem(problem, config);
  out.closed_form = config.use_closed_form && uses_closed_form(vector, scenario);
  if (std::isfinite(out.best_objective)) {
    const auto trace = composer::evaluate(vector, scenario, out.best_params);
    out.best_objective = trace.objective;
    out.constraints = trace.constraint_values();
    out.max_violation = problem.worst_scaled(out.constraints);
    out.feasible = out.max_violation >= -config.feasibility_tolerance;
    out.status = out.feasible ? "optimal" : "infeasible";
  }
  out.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace flashopt::opt
