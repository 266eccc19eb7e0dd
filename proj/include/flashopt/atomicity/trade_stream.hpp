#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <string>
#include <vector>

#include "flashopt/atomicity/arbitrage.hpp"

namespace flashopt::atomicity {

enum class Direction { x_to_y, y_to_x };

struct TradeEvent {
  int exchange = 0;  // -1: exchange outside the market, applied as a no-op
  Direction direction = Direction::x_to_y;
  Scalar amount = 0.0;
  // Sells back exactly what the previous event bought, on the same exchange.
  // `amount` and `direction` are ignored.
  bool mirror_previous = false;
};

struct SyntheticParams {
  // Trade size = reserve_in * exp(N(log_mean, log_sd)), reserves taken from
  // the initial market.
  Scalar log_mean = -7.0;
  Scalar log_sd = 1.0;
  Scalar prob_a = 0.5;
  Scalar prob_x_to_y = 0.5;
  // Follow every trade by its exact inverse.
  bool neutral = false;
};

class TradeStream {
 public:
  TradeStream() = default;
  explicit TradeStream(std::vector<TradeEvent> events);

  static TradeStream synthetic(const TwoExchangeMarket& market, const SyntheticParams& params,
                               std::uint64_t seed, int length);

  // Lines "block_index,exchange_id,direction,amount" with direction XY or YX.
  // Blank lines, '#' comments and a leading header line are skipped.
  static TradeStream replay(std::istream& in, const TwoExchangeMarket& market,
                            const std::string& origin = "trace");
  static TradeStream replay_file(const std::filesystem::path& path,
                                 const TwoExchangeMarket& market);

  const std::vector<TradeEvent>& events() const { return events_; }
  int size() const { return static_cast<int>(events_.size()); }
  TradeStream window(int offset, int count) const;

 private:
  std::vector<TradeEvent> events_;
};

// Applies one event to the market in place. Returns the output amount (0 for
// a no-op). `last_output` feeds mirror events.
Scalar apply_event(TwoExchangeMarket& market, const TradeEvent& event, const TradeEvent* previous,
                   Scalar last_output);

}  // namespace flashopt::atomicity
