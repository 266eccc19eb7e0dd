#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flashopt/composer/attack_vector.hpp"
#include "flashopt/opt/local.hpp"
#include "flashopt/opt/problem.hpp"

namespace flashopt::opt {

enum class Method { sqp, auglag };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct SolverConfig {
  int max_iterations = 200;
  Scalar tolerance = 1e-9;
  Scalar feasibility_tolerance = 1e-6;  // on scaled residuals
  Scalar fd_step = 1e-6;                // relative to each parameter's box width
  int starts = 16;
  std::uint64_t seed = 1;
  int threads = 1;
  Method method = Method::sqp;
  bool use_closed_form = true;

  // Throws ConfigError on non-positive tolerances or counts.
  void validate() const;
};

struct StartRecord {
  Vector start;
  Vector x;
  Scalar objective = 0.0;
  Scalar worst_scaled = 0.0;
  int iterations = 0;
  bool feasible = false;
  std::string method;
  std::string status;
};

struct OptimizationResult {
  bool feasible = false;
  std::string status;
  Vector best_params;
  Scalar best_objective = 0.0;
  // Smallest scaled residual at best_params (negative means violated).
  Scalar max_violation = 0.0;
  Vector constraints;  // raw residuals at best_params
  Vector scales;
  std::vector<std::string> constraint_names;
  std::vector<int> active;  // indices with |scaled residual| <= 1e-6
  int iterations = 0;
  int starts_tried = 0;
  double wall_time = 0.0;  // seconds
  std::string method;
  bool closed_form = false;
  std::vector<StartRecord> starts;
};

// n points of a Latin hypercube in [0, 1]^dim.
std::vector<Vector> latin_hypercube(int dim, int count, Rng& rng);

OptimizationResult solve_problem(const Problem& problem, const SolverConfig& config);

// Multi-start solve of the vector. The reported objective and residuals come
// from a fresh trace evaluation of the returned point.
OptimizationResult solve(const composer::AttackVector& vector, const models::WorldState& scenario,
                         const SolverConfig& config);

}  // namespace flashopt::opt
