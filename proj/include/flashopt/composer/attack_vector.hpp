#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "flashopt/common.hpp"
#include "flashopt/models/operations.hpp"
#include "flashopt/models/world_state.hpp"

namespace flashopt::composer {

using models::AssetId;
using models::EntityId;
using models::PoolId;
using models::WorldState;

enum class Endpoint {
  flash_loan,
  flash_repay,
  sell_x_for_y_fixed,
  amm_swap_x_for_y,
  amm_swap_y_for_x,
  reserve_convert_x_to_y,
  collateralized_borrow,
  collateralized_repay,
  margin_short,
};

const char* endpoint_name(Endpoint e);
Endpoint endpoint_from_name(const std::string& name);
// False only for endpoints without a numeric amount (collateralized_repay).
bool endpoint_takes_amount(Endpoint e);

// --- amount bindings -------------------------------------------------------

// Free parameter p_{index+1}.
struct ParamRef {
  int index = 0;
  bool operator==(const ParamRef&) const = default;
};
// Sum of several free parameters (e.g. a flash loan covering all legs).
struct ParamSum {
  std::vector<int> indices;
  bool operator==(const ParamSum&) const = default;
};
// Everything the trader currently holds of `asset`.
struct AllHeld {
  AssetId asset;
  bool operator==(const AllHeld&) const = default;
};
// X needed at a fixed-price market to buy back the debt of the trader's
// oldest position in a lending pool.
struct DebtBuyback {
  PoolId lending_pool;
  PoolId market;
  bool operator==(const DebtBuyback&) const = default;
};
// Amount the trader still owes a flash-loan pool.
struct LoanOutstanding {
  PoolId pool;
  bool operator==(const LoanOutstanding&) const = default;
};
struct FixedAmount {
  Scalar value = 0.0;
  bool operator==(const FixedAmount&) const = default;
};

using Binding = std::variant<ParamRef, ParamSum, AllHeld, DebtBuyback, LoanOutstanding, FixedAmount>;

Scalar resolve_binding(const Binding& binding, const WorldState& state, const EntityId& trader,
                       const Vector& params);
std::string describe_binding(const Binding& binding);
// Largest parameter index referenced, or -1.
int max_param_index(const Binding& binding);
bool binding_uses_param(const Binding& binding, int index);

// --- steps and vectors -----------------------------------------------------

struct EndpointCall {
  Endpoint endpoint = Endpoint::flash_loan;
  PoolId pool;
  std::optional<Binding> amount;
  // Residual keys of this call that become optimization constraints.
  std::vector<std::string> exported;
  models::BorrowCap cap = models::BorrowCap::residual;
};

// T_i: one or more endpoint calls executed as a single transition.
struct ActionStep {
  std::string label;
  std::vector<EndpointCall> calls;
};

struct ParamSpec {
  std::string name;
  Scalar lower = 0.0;
  Scalar upper = kInfinity;
};

// O(S_0; S_N) = B(entity; asset; S_N) - B(entity; asset; S_0)
struct Objective {
  EntityId entity;
  AssetId asset;
};

// Algebraic evaluation of a vector for one initial state. `constraints`
// follows the order of the vector's exported residuals (step order, then call
// order, then residual order within a call).
struct ClosedFormValue {
  Scalar objective = 0.0;
  Vector constraints;
};
using ClosedFormFn = std::function<void(const Vector& params, ClosedFormValue& out)>;

struct ClosedForm {
  // Constraint scales, max(1, |constant term|), in exported order.
  Vector scales;
  ClosedFormFn evaluate;
};
using ClosedFormFactory = std::function<std::optional<ClosedForm>(const WorldState&)>;

struct AttackVector {
  std::string name;
  EntityId trader;
  std::vector<ActionStep> steps;
  std::vector<ParamSpec> params;
  Objective objective;
  // Symbols (e.g. "zY") whose exported residuals are dropped from the
  // constraint set.
  std::set<std::string> ignored;
  ClosedFormFactory closed_form;

  int n_params() const { return static_cast<int>(params.size()); }
  Vector lower_bounds() const;
  Vector upper_bounds() const;

  // Throws ConfigError when a binding references a parameter >= N.
  void validate() const;
};

struct TraceResidual {
  int step = 0;  // 1-based step index producing the residual
  models::Residual residual;
  bool exported = false;
};

struct EvaluationTrace {
  std::vector<WorldState> states;  // S_0 .. S_N
  std::vector<TraceResidual> residuals;
  Scalar objective = 0.0;

  // Exported residual values, in constraint order.
  Vector constraint_values() const;
};

class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(int step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

EvaluationTrace evaluate(const AttackVector& vector, const WorldState& scenario,
                         const Vector& params,
                         models::ExecutionMode mode = models::ExecutionMode::relaxed);

Scalar objective_value(const AttackVector& vector, const WorldState& s0, const WorldState& sn);

struct ConstraintDescriptor {
  int step = 0;  // 0 for parameter bounds
  std::string key;
  std::string symbol;
  std::string description;
  bool linear = true;
  Scalar scale = 1.0;
};

// Parameter lower bounds followed by the exported residuals, each classified
// as linear or nonlinear in the free parameters.
std::vector<ConstraintDescriptor> list_constraints(const AttackVector& vector,
                                                   const WorldState& scenario);

// Exported residual descriptors only (the optimizer's general constraints).
std::vector<ConstraintDescriptor> exported_constraints(const AttackVector& vector,
                                                       const WorldState& scenario);

}  // namespace flashopt::composer
