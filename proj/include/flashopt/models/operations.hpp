#pragma once

// Pure state-transition functions for the supported protocol endpoints.
//
// Every transition returns the successor state together with the signed
// constraint residuals of that step (residual >= 0 means satisfied). Residuals
// are reported, not enforced, unless the caller asks for strict execution.

#include <string>
#include <vector>

#include "flashopt/models/world_state.hpp"

namespace flashopt::models {

struct Residual {
  std::string key;          // stable identifier, e.g. "loan_cap"
  std::string symbol;       // short handle of the limiting quantity, e.g. "vX"
  std::string description;  // human-readable inequality
  Scalar value = 0.0;
  Scalar scale = 1.0;  // max(1, |constraint constant|)

  Scalar scaled() const { return value / scale; }
};

struct Transition {
  WorldState state;
  std::vector<Residual> residuals;
};

enum class ExecutionMode { relaxed, strict };

// How a lending pool treats a borrow above its available debt.
enum class BorrowCap { residual, clamp };

Transition flash_loan(const WorldState& state, const PoolId& pool, const EntityId& borrower,
                      Scalar amount, ExecutionMode mode = ExecutionMode::relaxed);

Transition flash_repay(const WorldState& state, const PoolId& pool, const EntityId& borrower,
                       Scalar amount, ExecutionMode mode = ExecutionMode::relaxed);

Transition sell_x_for_y_fixed(const WorldState& state, const PoolId& market,
                              const EntityId& trader, Scalar amount,
                              ExecutionMode mode = ExecutionMode::relaxed);

Transition amm_swap_x_for_y(const WorldState& state, const PoolId& amm, const EntityId& trader,
                            Scalar amount, ExecutionMode mode = ExecutionMode::relaxed);

Transition amm_swap_y_for_x(const WorldState& state, const PoolId& amm, const EntityId& trader,
                            Scalar amount, ExecutionMode mode = ExecutionMode::relaxed);

Scalar amm_spot_price_y(const WorldState& state, const PoolId& amm);

Scalar reserve_price_y(const WorldState& state, const PoolId& reserve);

Transition reserve_convert_x_to_y(const WorldState& state, const PoolId& reserve,
                                  const EntityId& trader, Scalar amount,
                                  ExecutionMode mode = ExecutionMode::relaxed);

// Collateral units per debt unit currently applied by `pool`.
Scalar lending_exchange_rate(const WorldState& state, const PoolId& pool);

Transition collateralized_borrow(const WorldState& state, const PoolId& pool,
                                 const EntityId& trader, Scalar collateral,
                                 ExecutionMode mode = ExecutionMode::relaxed,
                                 BorrowCap cap = BorrowCap::residual);

// Repays the trader's oldest open position in `pool`.
Transition collateralized_repay(const WorldState& state, const PoolId& pool,
                                const EntityId& trader,
                                ExecutionMode mode = ExecutionMode::relaxed);

Transition margin_short(const WorldState& state, const PoolId& platform, const EntityId& trader,
                        Scalar collateral, ExecutionMode mode = ExecutionMode::relaxed);

// (executed - expected) / expected
Scalar compute_slippage(Scalar expected_price, Scalar executed_price);

}  // namespace flashopt::models
