#include "flashopt/opt/problem.hpp"

#include <algorithm>
#include <cmath>

#include "flashopt/opt/finite_diff.hpp"

namespace flashopt::opt {

Scalar Problem::worst_scaled(const Vector& constraints) const {
  if (m == 0) return 0.0;
  return (constraints.array() / scales.array()).minCoeff();
}

bool uses_closed_form(const composer::AttackVector& vector, const models::WorldState& scenario) {
  if (!vector.closed_form) return false;
  auto closed = vector.closed_form(scenario);
  if (!closed) return false;
  return closed->scales.size() ==
         static_cast<Eigen::Index>(composer::exported_constraints(vector, scenario).size());
}

Problem make_problem(const composer::AttackVector& vector, const models::WorldState& scenario,
                     bool prefer_closed_form) {
  if (vector.n_params() < 1) throw ConfigError("vector has no free parameters");
  const auto descriptors = composer::exported_constraints(vector, scenario);
  Problem p;
  p.n = vector.n_params();
  p.m = static_cast<int>(descriptors.size());
  p.lower = vector.lower_bounds();
  p.upper = vector.upper_bounds();
  if (!p.lower.allFinite() || !p.upper.allFinite()) {
    throw ConfigError("vector '" + vector.name + "' needs finite parameter bounds to optimize");
  }
  p.scales.resize(p.m);
  for (int k = 0; k < p.m; ++k) {
    p.scales[k] = descriptors[k].scale;
    p.constraint_names.push_back(descriptors[k].symbol);
  }

  std::optional<composer::ClosedForm> closed;
  if (prefer_closed_form && vector.closed_form) closed = vector.closed_form(scenario);
  if (closed && closed->scales.size() == p.m) {
    p.scales = closed->scales;
    auto fn = closed->evaluate;
    p.evaluate = [fn](const Vector& x, ProblemValue& out) {
      composer::ClosedFormValue v;
      fn(x, v);
      out.objective = v.objective;
      out.constraints = std::move(v.constraints);
    };
  } else {
    p.evaluate = [vector, scenario](const Vector& x, ProblemValue& out) {
      const auto trace = composer::evaluate(vector, scenario, x);
      out.objective = trace.objective;
      out.constraints = trace.constraint_values();
    };
  }
  return p;
}

Vector finite_diff_gradient(const composer::AttackVector& vector,
                            const models::WorldState& scenario, const Vector& params,
                            Scalar step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("finite-difference step must be > 0");
  if (params.size() != vector.n_params()) throw ConfigError("parameter count mismatch");
  const Vector lo = vector.lower_bounds(), hi = vector.upper_bounds();
  for (int i = 0; i < params.size(); ++i) {
    if (params[i] - step < lo[i] || params[i] + step > hi[i]) {
      throw ConfigError("p" + std::to_string(i + 1) +
                        " is not interior to its bounds by at least the step");
    }
  }
  const Vector steps = Vector::Constant(params.size(), step);
  return central_gradient<Scalar>(
      [&](const Vector& x) { return composer::evaluate(vector, scenario, x).objective; }, params,
      steps);
}

}  // namespace flashopt::opt
