#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "flashopt/atomicity/arbitrage.hpp"
#include "flashopt/atomicity/trade_stream.hpp"

namespace flashopt::atomicity {

// Produces the stream for one trial; it must hold at least `length` events.
using StreamFactory = std::function<TradeStream(int trial, int length)>;

// Fresh synthetic stream per trial, seeded from (seed, trial).
StreamFactory synthetic_factory(const TwoExchangeMarket& market, const SyntheticParams& params,
                                std::uint64_t seed);
// Trial t replays the window starting at offset t, wrapping around.
StreamFactory replay_factory(TradeStream stream);

struct SweepConfig {
  std::vector<int> i_values;
  int trials = 100;
  int bootstrap_samples = 2000;
  std::uint64_t seed = 1;
};

struct SweepRow {
  int i = 0;
  Scalar mean = 0.0;
  Scalar ci_low = 0.0;
  Scalar ci_high = 0.0;
  int trials = 0;
};

// Percentile bootstrap of the mean, 95% level.
std::pair<Scalar, Scalar> bootstrap_ci(const std::vector<Scalar>& samples, int resamples,
                                       std::uint64_t seed);

std::vector<SweepRow> sweep(const TwoExchangeMarket& market, Scalar budget,
                            const StreamFactory& streams, const SweepConfig& config);

// Columns i, mean, ci_low, ci_high, trials.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace flashopt::atomicity
