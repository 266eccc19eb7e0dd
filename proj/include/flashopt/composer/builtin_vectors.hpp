#pragma once

#include <map>
#include <string>
#include <vector>

#include "flashopt/composer/attack_vector.hpp"
#include "flashopt/models/scenario_io.hpp"

namespace flashopt::composer {

// Treatment of the lending pool's available-debt cap zY.
enum class DebtCapMode {
  residual,  // exported as a constraint
  clamp,     // borrow is truncated at zY
  ignored,   // residual reported but not a constraint
};

DebtCapMode debt_cap_mode_from_name(const std::string& name);
const char* debt_cap_mode_name(DebtCapMode mode);

struct BuiltinOptions {
  DebtCapMode debt_cap = DebtCapMode::residual;
  // Replaces the upper bound of the named parameter ("p1", "p2", ...).
  std::map<std::string, Scalar> upper;
};

// Flash loan, collateralized borrow, margin pump through the AMM, dump of the
// borrowed asset into the pumped AMM, flash repay, buy back the debt at a
// fixed market and close the position. Two parameters: the collateral and the
// margin deposit.
AttackVector build_paa_vector(const models::Scenario& scenario, const BuiltinOptions& options = {});

// Flash loan, three purchases of the collateral asset (AMM, price reserve,
// fixed-price market) then a collateralized borrow priced by the AMM that was
// just moved, and flash repay. Three parameters.
AttackVector build_oracle_vector(const models::Scenario& scenario,
                                 const BuiltinOptions& options = {});

std::vector<std::string> builtin_vector_names();
AttackVector build_builtin_vector(const std::string& name, const models::Scenario& scenario,
                                  const BuiltinOptions& options = {});

// Id of the only pool of kind T in the state. ConfigError when there is none
// or more than one.
template <typename T>
PoolId unique_pool(const WorldState& state, const char* what) {
  PoolId found;
  for (const auto& [id, pool] : state.pools()) {
    if (!std::holds_alternative<T>(pool)) continue;
    if (!found.empty()) {
      throw ConfigError(std::string("scenario has more than one ") + what + " pool");
    }
    found = id;
  }
  if (found.empty()) throw ConfigError(std::string("scenario has no ") + what + " pool");
  return found;
}

}  // namespace flashopt::composer
