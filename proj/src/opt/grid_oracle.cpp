#include "flashopt/opt/grid_oracle.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace flashopt::opt {

namespace {

struct Cell {
  bool feasible = false;
  Scalar objective = -kInfinity;
  Scalar worst = -kInfinity;
  long index = -1;
};

bool better(const Cell& a, const Cell& b) {
  if (a.index < 0) return false;
  if (b.index < 0) return true;
  if (a.feasible != b.feasible) return a.feasible;
  if (a.feasible) {
    if (a.objective != b.objective) return a.objective > b.objective;
  } else if (a.worst != b.worst) {
    return a.worst > b.worst;
  }
  return a.index < b.index;
}

Vector grid_point(long index, const Vector& lo, const Vector& hi, int res) {
  Vector x(lo.size());
  for (Eigen::Index d = 0; d < lo.size(); ++d) {
    const long k = index % res;
    index /= res;
    x[d] = res == 1 ? lo[d] : lo[d] + (hi[d] - lo[d]) * static_cast<Scalar>(k) / (res - 1);
  }
  return x;
}

Cell scan(const Problem& problem, const Vector& lo, const Vector& hi, const GridConfig& config,
          long& evaluations) {
  const int res = config.resolution;
  long total = 1;
  for (int d = 0; d < problem.n; ++d) total *= res;
  evaluations += total;

  auto visit = [&](long begin, long stride) {
    Cell best;
    for (long i = begin; i < total; i += stride) {
      Cell c;
      c.index = i;
      try {
        const ProblemValue v = problem(grid_point(i, lo, hi, res));
        if (!std::isfinite(v.objective)) continue;
        c.objective = v.objective;
        c.worst = problem.worst_scaled(v.constraints);
        c.feasible = c.worst >= -config.feasibility_tolerance;
      } catch (const std::exception&) {
        continue;
      }
      if (better(c, best)) best = c;
    }
    return best;
  };

  const int workers = std::max(1, std::min<int>(config.threads, static_cast<int>(total)));
  if (workers == 1) return visit(0, 1);
  std::vector<Cell> partial(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() { partial[w] = visit(w, workers); });
  }
  for (auto& t : pool) t.join();
  Cell best;
  for (const auto& c : partial) {
    if (better(c, best)) best = c;
  }
  return best;
}

}  // namespace

OptimizationResult grid_oracle_problem(const Problem& problem, const GridConfig& config) {
  if (problem.n > 3) {
    throw UsageError("grid oracle supports at most 3 parameters, got " +
                     std::to_string(problem.n));
  }
  if (problem.n < 1) throw ConfigError("problem has no free parameters");
  if (config.resolution < 2) throw ConfigError("grid resolution must be >= 2");
  if (!problem.lower.allFinite() || !problem.upper.allFinite()) {
    throw ConfigError("bounds must be finite");
  }
  const auto t0 = std::chrono::steady_clock::now();
  long evaluations = 0;
  Vector lo = problem.lower, hi = problem.upper;
  Cell best = scan(problem, lo, hi, config, evaluations);
  Vector x = best.index >= 0 ? grid_point(best.index, lo, hi, config.resolution) : lo;

  if (config.refine && best.index >= 0) {
    const Vector cell = (hi - lo) / (config.resolution - 1);
    const Vector rlo = (x - cell).cwiseMax(problem.lower);
    const Vector rhi = (x + cell).cwiseMin(problem.upper);
    const Cell fine = scan(problem, rlo, rhi, config, evaluations);
    // Keep the coarse point on ties so the refinement never makes it worse.
    const bool improves =
        fine.index >= 0 &&
        ((fine.feasible && !best.feasible) ||
         (fine.feasible == best.feasible &&
          (fine.feasible ? fine.objective > best.objective : fine.worst > best.worst)));
    if (improves) {
      best = fine;
      x = grid_point(fine.index, rlo, rhi, config.resolution);
    }
  }

  OptimizationResult out;
  out.method = "grid";
  out.best_params = x;
  out.scales = problem.scales;
  out.constraint_names = problem.constraint_names;
  out.iterations = static_cast<int>(std::min<long>(evaluations, 2147483647L));
  out.starts_tried = 1;
  if (best.index < 0) {
    out.feasible = false;
    out.status = "infeasible";
    out.best_objective = -kInfinity;
    out.max_violation = -kInfinity;
  } else {
    const ProblemValue v = problem(x);
    out.best_objective = v.objective;
    out.constraints = v.constraints;
    out.max_violation = problem.worst_scaled(v.constraints);
    out.feasible = best.feasible;
    out.status = best.feasible ? "optimal" : "infeasible";
    for (int k = 0; k < problem.m; ++k) {
      if (std::abs(v.constraints[k] / problem.scales[k]) <= 1e-6) out.active.push_back(k);
    }
  }
  out.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

OptimizationResult grid_oracle(const composer::AttackVector& vector,
                               const models::WorldState& scenario, const GridConfig& config) {
  if (vector.n_params() > 3) {
    throw UsageError("grid oracle supports at most 3 parameters, got " +
                     std::to_string(vector.n_params()));
  }
  const Problem problem = make_problem(vector, scenario, config.use_closed_form);
  OptimizationResult out = grid_oracle_problem(problem, config);
  out.closed_form = config.use_closed_form && uses_closed_form(vector, scenario);
  return out;
}

}  // namespace flashopt::opt
