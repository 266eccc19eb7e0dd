#pragma once

#include <filesystem>
#include <string>

#include "flashopt/common.hpp"
#include "flashopt/models/pools.hpp"

namespace flashopt::atomicity {

class TradeStream;

// Two constant-product exchanges quoting the same pair. Budgets and profits
// are in units of X; prices are X per Y.
struct TwoExchangeMarket {
  std::string id_a = "A";
  std::string id_b = "B";
  models::ConstantProductAmm a;
  models::ConstantProductAmm b;

  void validate() const;
  const models::ConstantProductAmm& pool(int index) const { return index == 0 ? a : b; }
  models::ConstantProductAmm& pool(int index) { return index == 0 ? a : b; }
  // 0, 1, or -1 for an unknown id.
  int index_of(const std::string& id) const;
};

// {"exchanges": [{"id": "A", "x": "DAI", "y": "ETH", "uX": ..., "uY": ..., "fee": 0}, {...}]}
TwoExchangeMarket load_market(const std::filesystem::path& path);

struct AtomicResult {
  Scalar aarb = 0.0;
  Scalar held = 0.0;     // Y held between the two legs
  int buy_exchange = 0;  // index of the exchange used for T_A
};

struct ArbOutcome {
  int i = 0;
  Scalar aarb = 0.0;
  Scalar naarb = 0.0;
  Scalar hv = 0.0;
  Scalar profit_difference = 0.0;
};

// T_A buys Y with `budget` X on the exchange with the lower Y price (ties go
// to A), T_B sells all of it on the other exchange right away.
AtomicResult atomic_arbitrage(const TwoExchangeMarket& market, Scalar budget);

// Same legs with the first `i` stream events applied between them.
ArbOutcome non_atomic_arbitrage(const TwoExchangeMarket& market, Scalar budget,
                                const TradeStream& stream, int i);

// T_A size that equalizes the marginal prices of the two legs; 0 when there
// is no profitable gap.
Scalar optimal_budget(const TwoExchangeMarket& market);

}  // namespace flashopt::atomicity
