#include "flashopt/models/operations.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flashopt/models/amm_math.hpp"

namespace flashopt::models {

namespace {

void check_amount(Scalar amount, const char* op) {
  if (!std::isfinite(amount)) {
    throw ConfigError(std::string(op) + ": amount must be finite");
  }
  if (amount < 0.0) {
    throw ConfigError(std::string(op) + ": amount must be >= 0");
  }
}

Scalar unit_scale(Scalar constant) { return std::max(1.0, std::abs(constant)); }

Residual balance_residual(const EntityId& who, const AssetId& asset, Scalar balance,
                          Scalar spend) {
  return {"balance", "B", "B(" + who + ";" + asset + ") - spend >= 0", balance - spend,
          unit_scale(balance)};
}

Transition finish(WorldState state, std::vector<Residual> residuals, ExecutionMode mode,
                  const char* op) {
  if (mode == ExecutionMode::strict) {
    for (const auto& r : residuals) {
      if (r.scaled() < -kStrictTolerance) {
        std::ostringstream msg;
        msg << op << ": constraint violated: " << r.description << " (residual " << r.value
            << ")";
        throw ConstraintViolation(msg.str(), r.value);
      }
    }
  }
  return {std::move(state).advanced(), std::move(residuals)};
}

}  // namespace

Transition flash_loan(const WorldState& state, const PoolId& pool_id, const EntityId& borrower,
                      Scalar amount, ExecutionMode mode) {
  check_amount(amount, "flash_loan");
  FlashLoanPool pool = state.pool_as<FlashLoanPool>(pool_id);
  std::vector<Residual> residuals;
  if (std::isfinite(pool.available)) {
    residuals.push_back(
        {"loan_cap", "vX", "vX - b >= 0", pool.available - amount, unit_scale(pool.available)});
  }
  pool.available -= amount;
  pool.outstanding[borrower] += amount;
  WorldState next = state.with_delta(borrower, pool.asset, amount).with_pool(pool_id, pool);
  return finish(std::move(next), std::move(residuals), mode, "flash_loan");
}

Transition flash_repay(const WorldState& state, const PoolId& pool_id, const EntityId& borrower,
                       Scalar amount, ExecutionMode mode) {
  check_amount(amount, "flash_repay");
  FlashLoanPool pool = state.pool_as<FlashLoanPool>(pool_id);
  const Scalar due = amount + pool.interest.fee(amount);
  const Scalar balance = state.balance(borrower, pool.asset);
  std::vector<Residual> residuals{{"repay_balance", "repay",
                                   "B(" + borrower + ";" + pool.asset +
                                       ") - b - interest(b) >= 0",
                                   balance - due, unit_scale(balance)}};
  pool.available += amount;
  pool.outstanding[borrower] -= amount;
  WorldState next = state.with_delta(borrower, pool.asset, -due).with_pool(pool_id, pool);
  return finish(std::move(next), std::move(residuals), mode, "flash_repay");
}

Transition sell_x_for_y_fixed(const WorldState& state, const PoolId& market_id,
                              const EntityId& trader, Scalar amount, ExecutionMode mode) {
  check_amount(amount, "sell_x_for_y_fixed");
  FixedPriceMarket market = state.pool_as<FixedPriceMarket>(market_id);
  if (!(market.price > 0.0)) throw ConfigError("sell_x_for_y_fixed: pm must be > 0");
  const Scalar bought = amount / market.price;
  const Scalar balance = state.balance(trader, market.asset_x);
  std::vector<Residual> residuals{balance_residual(trader, market.asset_x, balance, amount)};
  if (std::isfinite(market.max_y)) {
    residuals.push_back({"max_y", "maxY", "maxY - q/pm >= 0", market.remaining_y() - bought,
                         unit_scale(market.max_y)});
  }
  market.sold_y += bought;
  WorldState next = state.with_delta(trader, market.asset_x, -amount)
                        .with_delta(trader, market.asset_y, bought)
                        .with_pool(market_id, market);
  return finish(std::move(next), std::move(residuals), mode, "sell_x_for_y_fixed");
}

namespace {

Transition amm_swap(const WorldState& state, const PoolId& amm_id, const EntityId& trader,
                    Scalar amount, ExecutionMode mode, bool x_to_y) {
  const char* op = x_to_y ? "amm_swap_x_for_y" : "amm_swap_y_for_x";
  check_amount(amount, op);
  ConstantProductAmm amm = state.pool_as<ConstantProductAmm>(amm_id);
  if (!(amm.reserve_x > 0.0) || !(amm.reserve_y > 0.0)) {
    throw ConfigError(std::string(op) + ": pool '" + amm_id + "' has a zero reserve");
  }
  Scalar& reserve_in = x_to_y ? amm.reserve_x : amm.reserve_y;
  Scalar& reserve_out = x_to_y ? amm.reserve_y : amm.reserve_x;
  const AssetId& asset_in = x_to_y ? amm.asset_x : amm.asset_y;
  const AssetId& asset_out = x_to_y ? amm.asset_y : amm.asset_x;

  const Scalar out = constant_product_output(reserve_in, reserve_out, amount, amm.fee_rate);
  const Scalar balance = state.balance(trader, asset_in);
  std::vector<Residual> residuals{balance_residual(trader, asset_in, balance, amount)};
  reserve_in += amount;
  reserve_out -= out;
  WorldState next = state.with_delta(trader, asset_in, -amount)
                        .with_delta(trader, asset_out, out)
                        .with_pool(amm_id, amm);
  return finish(std::move(next), std::move(residuals), mode, op);
}

}  // namespace

Transition amm_swap_x_for_y(const WorldState& state, const PoolId& amm, const EntityId& trader,
                            Scalar amount, ExecutionMode mode) {
  return amm_swap(state, amm, trader, amount, mode, true);
}

Transition amm_swap_y_for_x(const WorldState& state, const PoolId& amm, const EntityId& trader,
                            Scalar amount, ExecutionMode mode) {
  return amm_swap(state, amm, trader, amount, mode, false);
}

Scalar amm_spot_price_y(const WorldState& state, const PoolId& amm_id) {
  const auto& amm = state.pool_as<ConstantProductAmm>(amm_id);
  if (!(amm.reserve_y > 0.0) || !(amm.reserve_x > 0.0)) {
    throw ConfigError("amm_spot_price_y: pool '" + amm_id + "' has a zero reserve");
  }
  return spot_price(amm.reserve_x, amm.reserve_y);
}

Scalar reserve_price_y(const WorldState& state, const PoolId& reserve_id) {
  const auto& r = state.pool_as<AutomatedPriceReserve>(reserve_id);
  return reserve_price(r.min_price, r.liquidity_rate, r.inventory_x);
}

Transition reserve_convert_x_to_y(const WorldState& state, const PoolId& reserve_id,
                                  const EntityId& trader, Scalar amount, ExecutionMode mode) {
  check_amount(amount, "reserve_convert_x_to_y");
  AutomatedPriceReserve reserve = state.pool_as<AutomatedPriceReserve>(reserve_id);
  const Scalar pre_price = reserve_price(reserve.min_price, reserve.liquidity_rate,
                                         reserve.inventory_x);
  const Scalar out = reserve_output(reserve.liquidity_rate, pre_price, amount);
  reserve.inventory_x += amount;
  const Scalar post_price = reserve_price(reserve.min_price, reserve.liquidity_rate,
                                          reserve.inventory_x);
  const Scalar balance = state.balance(trader, reserve.asset_x);
  std::vector<Residual> residuals{
      balance_residual(trader, reserve.asset_x, balance, amount),
      {"reserve_min_price", "minP", "P_Y(R;S') - minP >= 0", post_price - reserve.min_price,
       unit_scale(reserve.min_price)},
  };
  if (std::isfinite(reserve.max_price)) {
    residuals.push_back({"reserve_max_price", "maxP", "maxP - P_Y(R;S') >= 0",
                         reserve.max_price - post_price, unit_scale(reserve.max_price)});
  }
  WorldState next = state.with_delta(trader, reserve.asset_x, -amount)
                        .with_delta(trader, reserve.asset_y, out)
                        .with_pool(reserve_id, reserve);
  return finish(std::move(next), std::move(residuals), mode, "reserve_convert_x_to_y");
}

Scalar lending_exchange_rate(const WorldState& state, const PoolId& pool_id) {
  const auto& pool = state.pool_as<LendingPool>(pool_id);
  if (pool.price_oracle.empty()) return pool.exchange_rate;
  const auto& amm = state.pool_as<ConstantProductAmm>(pool.price_oracle);
  // Collateral units per debt unit.
  if (amm.asset_x == pool.debt_asset && amm.asset_y == pool.collateral_asset) {
    return amm.reserve_y / amm.reserve_x;
  }
  if (amm.asset_y == pool.debt_asset && amm.asset_x == pool.collateral_asset) {
    return amm.reserve_x / amm.reserve_y;
  }
  throw ConfigError("lending pool '" + pool_id + "': oracle '" + pool.price_oracle +
                    "' does not quote " + pool.collateral_asset + "/" + pool.debt_asset);
}

Transition collateralized_borrow(const WorldState& state, const PoolId& pool_id,
                                 const EntityId& trader, Scalar collateral, ExecutionMode mode,
                                 BorrowCap cap) {
  check_amount(collateral, "collateralized_borrow");
  LendingPool pool = state.pool_as<LendingPool>(pool_id);
  const Scalar rate = lending_exchange_rate(state, pool_id);
  Scalar borrowed = collateral * pool.collateral_factor / rate;
  if (cap == BorrowCap::clamp) borrowed = std::min(borrowed, pool.available_debt);
  const Scalar balance = state.balance(trader, pool.collateral_asset);
  std::vector<Residual> residuals{
      balance_residual(trader, pool.collateral_asset, balance, collateral)};
  if (std::isfinite(pool.available_debt)) {
    residuals.push_back({"debt_cap", "zY", "zY - c*cf/er >= 0", pool.available_debt - borrowed,
                         unit_scale(pool.available_debt)});
  }
  pool.available_debt -= borrowed;
  pool.positions.push_back({trader, collateral, borrowed});
  WorldState next = state.with_delta(trader, pool.collateral_asset, -collateral)
                        .with_delta(trader, pool.debt_asset, borrowed)
                        .with_pool(pool_id, pool);
  return finish(std::move(next), std::move(residuals), mode, "collateralized_borrow");
}

Transition collateralized_repay(const WorldState& state, const PoolId& pool_id,
                                const EntityId& trader, ExecutionMode mode) {
  LendingPool pool = state.pool_as<LendingPool>(pool_id);
  const auto it = std::find_if(pool.positions.begin(), pool.positions.end(),
                               [&](const LendingPosition& p) { return p.trader == trader; });
  if (it == pool.positions.end()) {
    throw UsageError("collateralized_repay: '" + trader + "' has no open position in '" +
                     pool_id + "'");
  }
  const LendingPosition position = *it;
  pool.positions.erase(it);
  pool.available_debt += position.debt;
  const Scalar balance = state.balance(trader, pool.debt_asset);
  std::vector<Residual> residuals{{"debt_balance", "B",
                                   "B(" + trader + ";" + pool.debt_asset + ") - b >= 0",
                                   balance - position.debt, unit_scale(balance)}};
  WorldState next = state.with_delta(trader, pool.debt_asset, -position.debt)
                        .with_delta(trader, pool.collateral_asset, position.collateral)
                        .with_pool(pool_id, pool);
  return finish(std::move(next), std::move(residuals), mode, "collateralized_repay");
}

Transition margin_short(const WorldState& state, const PoolId& platform_id,
                        const EntityId& trader, Scalar collateral, ExecutionMode mode) {
  check_amount(collateral, "margin_short");
  MarginPlatform platform = state.pool_as<MarginPlatform>(platform_id);
  const Scalar leveraged = collateral * platform.leverage / platform.over_collateral_ratio;
  const Scalar balance = state.balance(trader, platform.collateral_asset);
  std::vector<Residual> residuals{
      balance_residual(trader, platform.collateral_asset, balance, collateral)};
  if (std::isfinite(platform.available_x)) {
    residuals.push_back({"margin_liquidity", "wX", "wX + d - d*l/ocr >= 0",
                         platform.available_x + collateral - leveraged,
                         unit_scale(platform.available_x)});
  }
  platform.available_x += collateral - leveraged;

  WorldState next = state.with_delta(trader, platform.collateral_asset, -collateral);
  Scalar locked = 0.0;
  if (!platform.venue.empty()) {
    ConstantProductAmm amm = next.pool_as<ConstantProductAmm>(platform.venue);
    if (amm.asset_x != platform.collateral_asset || amm.asset_y != platform.short_asset) {
      throw ConfigError("margin_short: venue '" + platform.venue + "' does not trade " +
                        platform.collateral_asset + " for " + platform.short_asset);
    }
    locked = constant_product_output(amm.reserve_x, amm.reserve_y, leveraged, amm.fee_rate);
    amm.reserve_x += leveraged;
    amm.reserve_y -= locked;
    next = next.with_pool(platform.venue, amm);
  } else if (platform.external_price) {
    locked = leveraged / *platform.external_price;
  } else {
    throw ConfigError("margin_short: platform '" + platform_id +
                      "' has neither a venue AMM nor an external price");
  }
  platform.locked[trader] += locked;
  next = next.with_pool(platform_id, platform);
  return finish(std::move(next), std::move(residuals), mode, "margin_short");
}

Scalar compute_slippage(Scalar expected_price, Scalar executed_price) {
  if (!(expected_price > 0.0)) {
    throw ConfigError("compute_slippage: expected price must be > 0");
  }
  return slippage(expected_price, executed_price);
}

}  // namespace flashopt::models
