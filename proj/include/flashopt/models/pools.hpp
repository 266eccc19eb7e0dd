#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "flashopt/common.hpp"
#include "flashopt/models/ledger.hpp"

namespace flashopt::models {

// Fee charged on a flash loan of `amount`: either proportional or a constant
// absolute fee per non-zero loan.
struct InterestModel {
  enum class Kind { rate, fixed };
  Kind kind = Kind::rate;
  Scalar value = 0.0;

  static InterestModel rate(Scalar r) { return {Kind::rate, r}; }
  static InterestModel fixed(Scalar fee) { return {Kind::fixed, fee}; }

  Scalar fee(Scalar amount) const;

  bool operator==(const InterestModel&) const = default;
};

struct FlashLoanPool {
  AssetId asset;
  Scalar available = 0.0;  // z_X
  InterestModel interest;
  std::map<EntityId, Scalar> outstanding;

  void validate() const;
  Scalar outstanding_of(const EntityId& borrower) const;
  bool operator==(const FlashLoanPool&) const = default;
};

struct ConstantProductAmm {
  AssetId asset_x;
  AssetId asset_y;
  Scalar reserve_x = 0.0;  // u_X
  Scalar reserve_y = 0.0;  // u_Y
  Scalar fee_rate = 0.0;

  void validate() const;
  bool operator==(const ConstantProductAmm&) const = default;
};

// Reserve quoting P_Y = minP * e^(lr * k_X).
struct AutomatedPriceReserve {
  AssetId asset_x;
  AssetId asset_y;
  Scalar inventory_x = 0.0;  // k_X
  Scalar liquidity_rate = 0.0;
  Scalar min_price = 0.0;
  Scalar max_price = kInfinity;

  void validate() const;
  bool operator==(const AutomatedPriceReserve&) const = default;
};

struct FixedPriceMarket {
  AssetId asset_x;
  AssetId asset_y;
  Scalar price = 0.0;       // p_m, X per Y
  Scalar max_y = kInfinity;  // cap on cumulative Y sold
  Scalar sold_y = 0.0;

  void validate() const;
  Scalar remaining_y() const { return max_y - sold_y; }
  bool operator==(const FixedPriceMarket&) const = default;
};

struct LendingPosition {
  EntityId trader;
  Scalar collateral = 0.0;  // c_X
  Scalar debt = 0.0;        // b_Y
  bool operator==(const LendingPosition&) const = default;
};

// Collateralized lending. The exchange rate (collateral units per debt unit)
// is either fixed or read from a constant-product AMM at borrow time.
struct LendingPool {
  AssetId collateral_asset;
  AssetId debt_asset;
  Scalar collateral_factor = 0.0;  // cf
  Scalar exchange_rate = 0.0;      // er, unused when price_oracle is set
  std::string price_oracle;        // AMM pool id, empty for a fixed rate
  Scalar available_debt = 0.0;     // z_Y
  std::vector<LendingPosition> positions;

  void validate() const;
  const LendingPosition* first_position(const EntityId& trader) const;
  bool operator==(const LendingPool&) const = default;
};

// Leveraged short of `short_asset` against `collateral_asset`. The leveraged
// principal is executed on a constant-product AMM (`venue`) or at a fixed
// external price.
struct MarginPlatform {
  AssetId collateral_asset;
  AssetId short_asset;
  Scalar leverage = 1.0;
  Scalar over_collateral_ratio = 1.0;  // ocr
  Scalar available_x = 0.0;            // w_X
  std::string venue;
  std::optional<Scalar> external_price;  // emp, X per Y
  std::map<EntityId, Scalar> locked;     // L(A; Y; S)

  void validate() const;
  Scalar locked_of(const EntityId& trader) const;
  bool operator==(const MarginPlatform&) const = default;
};

using Pool = std::variant<FlashLoanPool, ConstantProductAmm, AutomatedPriceReserve,
                          FixedPriceMarket, LendingPool, MarginPlatform>;

const char* pool_kind_name(const Pool& pool);
void validate_pool(const Pool& pool);

}  // namespace flashopt::models
