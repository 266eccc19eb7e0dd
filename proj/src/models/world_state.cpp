#include "flashopt/models/world_state.hpp"

#include <cmath>
#include <set>

namespace flashopt::models {

namespace {

bool finite(Scalar v) { return std::isfinite(v); }
// Caps may be +inf (unbounded).
bool cap_ok(Scalar v) { return !std::isnan(v) && v != -kInfinity; }

struct FiniteVisitor {
  bool operator()(const FlashLoanPool& p) const {
    for (const auto& [who, amount] : p.outstanding) {
      if (!finite(amount)) return false;
    }
    return cap_ok(p.available);
  }
  bool operator()(const ConstantProductAmm& p) const {
    return finite(p.reserve_x) && finite(p.reserve_y);
  }
  bool operator()(const AutomatedPriceReserve& p) const { return finite(p.inventory_x); }
  bool operator()(const FixedPriceMarket& p) const { return finite(p.sold_y); }
  bool operator()(const LendingPool& p) const {
    for (const auto& pos : p.positions) {
      if (!finite(pos.collateral) || !finite(pos.debt)) return false;
    }
    return cap_ok(p.available_debt);
  }
  bool operator()(const MarginPlatform& p) const {
    for (const auto& [who, amount] : p.locked) {
      if (!finite(amount)) return false;
    }
    return cap_ok(p.available_x);
  }
};

}  // namespace

WorldState::WorldState(BalanceLedger ledger, std::map<PoolId, Pool> pools,
                       std::vector<AssetId> assets, std::vector<EntityId> entities)
    : ledger_(std::move(ledger)),
      pools_(std::move(pools)),
      assets_(std::move(assets)),
      entities_(std::move(entities)) {
  std::set<AssetId> seen;
  for (const auto& a : assets_) {
    if (a.empty()) throw ConfigError("asset ids must be non-empty");
    if (!seen.insert(a).second) throw ConfigError("duplicate asset id '" + a + "'");
  }
  for (const auto& [id, pool] : pools_) {
    try {
      validate_pool(pool);
    } catch (const ConfigError& e) {
      throw ConfigError("pool '" + id + "': " + e.what());
    }
  }
  if (!ledger_.non_negative()) throw ConfigError("initial balances must be >= 0");
}

const Pool& WorldState::pool(const PoolId& id) const {
  const auto it = pools_.find(id);
  if (it == pools_.end()) throw ConfigError("unknown pool '" + id + "'");
  return it->second;
}

WorldState WorldState::with_balance(const EntityId& entity, const AssetId& asset,
                                    Scalar amount) const {
  WorldState next = *this;
  next.ledger_.set(entity, asset, amount);
  return next;
}

WorldState WorldState::with_delta(const EntityId& entity, const AssetId& asset,
                                  Scalar delta) const {
  WorldState next = *this;
  next.ledger_.add(entity, asset, delta);
  return next;
}

WorldState WorldState::with_pool(const PoolId& id, Pool pool) const {
  WorldState next = *this;
  next.pools_[id] = std::move(pool);
  return next;
}

WorldState WorldState::advanced() const {
  WorldState next = *this;
  ++next.step_index_;
  return next;
}

bool WorldState::all_finite() const {
  if (!ledger_.all_finite()) return false;
  for (const auto& [id, pool] : pools_) {
    if (!std::visit(FiniteVisitor{}, pool)) return false;
  }
  return true;
}

WorldState WorldState::at_step(int index) const {
  WorldState next = *this;
  next.step_index_ = index;
  return next;
}

}  // namespace flashopt::models
