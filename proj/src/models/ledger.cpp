#include "flashopt/models/ledger.hpp"

#include <cmath>

namespace flashopt::models {

Scalar BalanceLedger::balance(const EntityId& entity, const AssetId& asset) const {
  const auto it = entries_.find({entity, asset});
  return it == entries_.end() ? 0.0 : it->second;
}

void BalanceLedger::set(const EntityId& entity, const AssetId& asset, Scalar amount) {
  entries_[{entity, asset}] = amount;
}

void BalanceLedger::add(const EntityId& entity, const AssetId& asset, Scalar delta) {
  entries_[{entity, asset}] += delta;
}

bool BalanceLedger::non_negative(Scalar tolerance) const {
  for (const auto& [key, amount] : entries_) {
    if (amount < -tolerance) return false;
  }
  return true;
}

bool BalanceLedger::all_finite() const {
  for (const auto& [key, amount] : entries_) {
    if (!std::isfinite(amount)) return false;
  }
  return true;
}

}  // namespace flashopt::models
