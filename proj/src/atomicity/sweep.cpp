#include "flashopt/atomicity/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <tuple>

namespace flashopt::atomicity {

StreamFactory synthetic_factory(const TwoExchangeMarket& market, const SyntheticParams& params,
                                std::uint64_t seed) {
  return [market, params, seed](int trial, int length) {
    return TradeStream::synthetic(market, params,
                                  derive_seed(seed, static_cast<std::uint64_t>(trial)), length);
  };
}

StreamFactory replay_factory(TradeStream stream) {
  return [stream = std::move(stream)](int trial, int length) {
    if (stream.size() < length) {
      throw UsageError("trace has " + std::to_string(stream.size()) + " events, " +
                       std::to_string(length) + " needed (short by " +
                       std::to_string(length - stream.size()) + ")");
    }
    const int offsets = stream.size() - length + 1;
    return stream.window(trial % offsets, length);
  };
}

std::pair<Scalar, Scalar> bootstrap_ci(const std::vector<Scalar>& samples, int resamples,
                                       std::uint64_t seed) {
  if (samples.empty()) throw ConfigError("bootstrap needs at least one sample");
  if (resamples < 1) throw ConfigError("bootstrap needs at least one resample");
  Rng rng(seed);
  const std::size_t n = samples.size();
  std::vector<Scalar> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    Scalar sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += samples[rng.below(n)];
    m = sum / static_cast<Scalar>(n);
  }
  std::sort(means.begin(), means.end());
  auto at = [&](Scalar q) {
    const auto idx = static_cast<std::size_t>(std::floor(q * (resamples - 1) + 0.5));
    return means[std::min(idx, means.size() - 1)];
  };
  return {at(0.025), at(0.975)};
}

std::vector<SweepRow> sweep(const TwoExchangeMarket& market, Scalar budget,
                            const StreamFactory& streams, const SweepConfig& config) {
  if (config.trials < 1) throw ConfigError("trials must be >= 1");
  if (config.i_values.empty()) return {};
  for (int i : config.i_values) {
    if (i < 0) throw ConfigError("intermediary counts must be >= 0");
  }
  const int longest = *std::max_element(config.i_values.begin(), config.i_values.end());

  std::vector<std::vector<Scalar>> diffs(config.i_values.size());
  for (int t = 0; t < config.trials; ++t) {
    const TradeStream stream = streams(t, longest);
    for (std::size_t k = 0; k < config.i_values.size(); ++k) {
      diffs[k].push_back(
          non_atomic_arbitrage(market, budget, stream, config.i_values[k]).profit_difference);
    }
  }

  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < config.i_values.size(); ++k) {
    SweepRow row;
    row.i = config.i_values[k];
    row.trials = config.trials;
    const auto& d = diffs[k];
    row.mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<Scalar>(d.size());
    std::tie(row.ci_low, row.ci_high) =
        bootstrap_ci(d, config.bootstrap_samples, derive_seed(config.seed, 1000 + k));
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "i,mean,ci_low,ci_high,trials\n";
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.i << ',' << r.mean << ',' << r.ci_low << ',' << r.ci_high << ',' << r.trials << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

}  // namespace flashopt::atomicity
