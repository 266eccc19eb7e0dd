#pragma once

#include <functional>
#include <string>
#include <vector>

#include "flashopt/common.hpp"
#include "flashopt/composer/attack_vector.hpp"

namespace flashopt::opt {

struct ProblemValue {
  Scalar objective = 0.0;
  Vector constraints;  // raw units, >= 0 feasible
};

// maximize objective(x) s.t. constraints(x) >= 0, lower <= x <= upper.
struct Problem {
  int n = 0;
  int m = 0;
  Vector lower;
  Vector upper;
  Vector scales;  // per constraint, > 0
  std::vector<std::string> constraint_names;
  std::function<void(const Vector& x, ProblemValue& out)> evaluate;

  ProblemValue operator()(const Vector& x) const {
    ProblemValue v;
    evaluate(x, v);
    return v;
  }
  // Smallest scaled residual, or 0 with no constraints.
  Scalar worst_scaled(const Vector& constraints) const;
};

// Builds the optimization problem of an attack vector. The closed form is
// used when the vector has one for this scenario and `prefer_closed_form` is
// set; otherwise every evaluation replays the full trace.
Problem make_problem(const composer::AttackVector& vector, const models::WorldState& scenario,
                     bool prefer_closed_form = true);

// True when make_problem would pick the closed-form path.
bool uses_closed_form(const composer::AttackVector& vector, const models::WorldState& scenario);

}  // namespace flashopt::opt
