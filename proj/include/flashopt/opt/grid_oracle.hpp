#pragma once

#include "flashopt/opt/solver.hpp"

namespace flashopt::opt {

struct GridConfig {
  int resolution = 50;  // points per axis, endpoints included
  Scalar feasibility_tolerance = 1e-6;
  int threads = 1;
  bool use_closed_form = true;
  bool refine = true;
};

// Exhaustive scan of the bound box, then a second scan of the same resolution
// over the cells adjacent to the best point. At most three parameters.
OptimizationResult grid_oracle_problem(const Problem& problem, const GridConfig& config);

OptimizationResult grid_oracle(const composer::AttackVector& vector,
                               const models::WorldState& scenario, const GridConfig& config);

}  // namespace flashopt::opt
