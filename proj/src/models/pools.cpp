#include "flashopt/models/pools.hpp"

#include <cmath>

namespace flashopt::models {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

bool finite(Scalar v) { return std::isfinite(v); }

}  // namespace

Scalar InterestModel::fee(Scalar amount) const {
  switch (kind) {
    case Kind::rate:
      return value * amount;
    case Kind::fixed:
      return amount > 0.0 ? value : 0.0;
  }
  return 0.0;
}

void FlashLoanPool::validate() const {
  require(!asset.empty(), "flash loan pool: empty asset");
  require(available >= 0.0, "flash loan pool: vX must be >= 0");
  require(finite(interest.value) && interest.value >= 0.0,
          "flash loan pool: interest must be finite and >= 0");
}

Scalar FlashLoanPool::outstanding_of(const EntityId& borrower) const {
  const auto it = outstanding.find(borrower);
  return it == outstanding.end() ? 0.0 : it->second;
}

void ConstantProductAmm::validate() const {
  require(!asset_x.empty() && !asset_y.empty() && asset_x != asset_y,
          "amm: assets must be distinct and non-empty");
  require(finite(reserve_x) && reserve_x > 0.0, "amm: uX must be > 0");
  require(finite(reserve_y) && reserve_y > 0.0, "amm: uY must be > 0");
  require(fee_rate >= 0.0 && fee_rate < 1.0, "amm: fee must be in [0, 1)");
}

void AutomatedPriceReserve::validate() const {
  require(!asset_x.empty() && !asset_y.empty() && asset_x != asset_y,
          "reserve: assets must be distinct and non-empty");
  require(finite(liquidity_rate) && liquidity_rate > 0.0, "reserve: lr must be > 0");
  require(finite(min_price) && min_price > 0.0, "reserve: minP must be > 0");
  require(max_price >= min_price, "reserve: maxP must be >= minP");
  require(finite(inventory_x) && inventory_x >= 0.0, "reserve: kX must be >= 0");
}

void FixedPriceMarket::validate() const {
  require(!asset_x.empty() && !asset_y.empty() && asset_x != asset_y,
          "fixed-price market: assets must be distinct and non-empty");
  require(finite(price) && price > 0.0, "fixed-price market: pm must be > 0");
  require(max_y >= 0.0, "fixed-price market: maxY must be >= 0");
}

void LendingPool::validate() const {
  require(!collateral_asset.empty() && !debt_asset.empty() &&
              collateral_asset != debt_asset,
          "lending pool: assets must be distinct and non-empty");
  require(collateral_factor > 0.0 && collateral_factor < 1.0,
          "lending pool: cf must be in (0, 1)");
  if (price_oracle.empty()) {
    require(finite(exchange_rate) && exchange_rate > 0.0, "lending pool: er must be > 0");
  }
  require(available_debt >= 0.0, "lending pool: zY must be >= 0");
}

const LendingPosition* LendingPool::first_position(const EntityId& trader) const {
  for (const auto& p : positions) {
    if (p.trader == trader) return &p;
  }
  return nullptr;
}

void MarginPlatform::validate() const {
  require(!collateral_asset.empty() && !short_asset.empty() &&
              collateral_asset != short_asset,
          "margin platform: assets must be distinct and non-empty");
  require(finite(leverage) && leverage >= 1.0, "margin platform: leverage must be >= 1");
  require(finite(over_collateral_ratio) && over_collateral_ratio > 0.0,
          "margin platform: ocr must be > 0");
  if (external_price) {
    require(*external_price > 0.0, "margin platform: emp must be > 0");
  }
}

Scalar MarginPlatform::locked_of(const EntityId& trader) const {
  const auto it = locked.find(trader);
  return it == locked.end() ? 0.0 : it->second;
}

const char* pool_kind_name(const Pool& pool) {
  struct Visitor {
    const char* operator()(const FlashLoanPool&) const { return "flash_loan"; }
    const char* operator()(const ConstantProductAmm&) const { return "constant_product_amm"; }
    const char* operator()(const AutomatedPriceReserve&) const { return "price_reserve"; }
    const char* operator()(const FixedPriceMarket&) const { return "fixed_price"; }
    const char* operator()(const LendingPool&) const { return "lending"; }
    const char* operator()(const MarginPlatform&) const { return "margin"; }
  };
  return std::visit(Visitor{}, pool);
}

void validate_pool(const Pool& pool) {
  std::visit([](const auto& p) { p.validate(); }, pool);
}

}  // namespace flashopt::models
