#pragma once

#include <map>
#include <string>
#include <vector>

#include "flashopt/models/ledger.hpp"
#include "flashopt/models/pools.hpp"

namespace flashopt::models {

using PoolId = std::string;

// Snapshot S_i of balances and protocol states. Values are never mutated in
// place; every `with_*` call returns a modified copy.
class WorldState {
 public:
  WorldState() = default;
  WorldState(BalanceLedger ledger, std::map<PoolId, Pool> pools,
             std::vector<AssetId> assets = {}, std::vector<EntityId> entities = {});

  const BalanceLedger& ledger() const { return ledger_; }
  const std::map<PoolId, Pool>& pools() const { return pools_; }
  const std::vector<AssetId>& assets() const { return assets_; }
  const std::vector<EntityId>& entities() const { return entities_; }
  int step_index() const { return step_index_; }

  Scalar balance(const EntityId& entity, const AssetId& asset) const {
    return ledger_.balance(entity, asset);
  }

  bool has_pool(const PoolId& id) const { return pools_.count(id) != 0; }
  const Pool& pool(const PoolId& id) const;

  // Typed access; throws ConfigError when the id is unknown or the pool has a
  // different kind.
  template <typename T>
  const T& pool_as(const PoolId& id) const {
    const Pool& p = pool(id);
    if (const T* typed = std::get_if<T>(&p)) return *typed;
    throw ConfigError("pool '" + id + "' is a " + pool_kind_name(p) +
                      " pool, not the kind this operation requires");
  }

  WorldState with_balance(const EntityId& entity, const AssetId& asset, Scalar amount) const;
  WorldState with_delta(const EntityId& entity, const AssetId& asset, Scalar delta) const;
  WorldState with_pool(const PoolId& id, Pool pool) const;
  WorldState advanced() const;
  WorldState at_step(int index) const;

  bool all_finite() const;

  bool operator==(const WorldState&) const = default;

 private:
  BalanceLedger ledger_;
  std::map<PoolId, Pool> pools_;
  std::vector<AssetId> assets_;
  std::vector<EntityId> entities_;
  int step_index_ = 0;
};

}  // namespace flashopt::models
