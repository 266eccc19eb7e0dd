#pragma once

#include <map>
#include <string>
#include <utility>

#include "flashopt/common.hpp"

namespace flashopt::models {

using AssetId = std::string;
using EntityId = std::string;

// B(E; X; S): balances of every (entity, asset) pair. Absent entries read as 0.
class BalanceLedger {
 public:
  using Key = std::pair<EntityId, AssetId>;

  Scalar balance(const EntityId& entity, const AssetId& asset) const;
  void set(const EntityId& entity, const AssetId& asset, Scalar amount);
  void add(const EntityId& entity, const AssetId& asset, Scalar delta);

  // True when every stored amount is >= -tolerance.
  bool non_negative(Scalar tolerance = 0.0) const;
  bool all_finite() const;

  const std::map<Key, Scalar>& entries() const { return entries_; }

  bool operator==(const BalanceLedger&) const = default;

 private:
  std::map<Key, Scalar> entries_;
};

}  // namespace flashopt::models
