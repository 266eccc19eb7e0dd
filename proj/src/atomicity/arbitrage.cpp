#include "flashopt/atomicity/arbitrage.hpp"

#include <cmath>

#include <json.hpp>

#include "flashopt/atomicity/trade_stream.hpp"
#include "flashopt/models/amm_math.hpp"
#include "flashopt/models/scenario_io.hpp"

namespace flashopt::atomicity {

using models::ConstantProductAmm;

namespace {

Scalar price_y(const ConstantProductAmm& p) { return models::spot_price(p.reserve_x, p.reserve_y); }

Scalar mean_price(const TwoExchangeMarket& m) { return 0.5 * (price_y(m.a) + price_y(m.b)); }

int cheaper(const TwoExchangeMarket& m) { return price_y(m.b) < price_y(m.a) ? 1 : 0; }

// X -> Y on `pool`, returns Y out.
Scalar buy_y(ConstantProductAmm& pool, Scalar x_in) {
  const Scalar out = models::constant_product_output(pool.reserve_x, pool.reserve_y, x_in,
                                                     pool.fee_rate);
  pool.reserve_x += x_in;
  pool.reserve_y -= out;
  return out;
}

Scalar sell_y(ConstantProductAmm& pool, Scalar y_in) {
  const Scalar out = models::constant_product_output(pool.reserve_y, pool.reserve_x, y_in,
                                                     pool.fee_rate);
  pool.reserve_y += y_in;
  pool.reserve_x -= out;
  return out;
}

void check_budget(Scalar budget) {
  if (!(budget > 0.0) || !std::isfinite(budget)) throw ConfigError("budget must be > 0");
}

}  // namespace

void TwoExchangeMarket::validate() const {
  a.validate();
  b.validate();
  if (a.asset_x != b.asset_x || a.asset_y != b.asset_y) {
    throw ConfigError("both exchanges must quote the same pair");
  }
  if (!(a.reserve_x > 0.0 && a.reserve_y > 0.0 && b.reserve_x > 0.0 && b.reserve_y > 0.0)) {
    throw ConfigError("exchange reserves must be > 0");
  }
  if (id_a == id_b) throw ConfigError("exchange ids must differ");
}

int TwoExchangeMarket::index_of(const std::string& id) const {
  if (id == id_a) return 0;
  if (id == id_b) return 1;
  return -1;
}

TwoExchangeMarket load_market(const std::filesystem::path& path) {
  const std::string text = models::read_text_file(path);
  const nlohmann::json doc = models::parse_json_text(text, path.string());
  TwoExchangeMarket m;
  try {
    const auto& ex = doc.at("exchanges");
    if (!ex.is_array() || ex.size() != 2) {
      throw ParseError(path.string() + ": 'exchanges' must list exactly two pools");
    }
    for (int k = 0; k < 2; ++k) {
      const auto& e = ex[k];
      ConstantProductAmm& p = m.pool(k);
      (k == 0 ? m.id_a : m.id_b) = e.at("id").get<std::string>();
      p.asset_x = e.at("x").get<std::string>();
      p.asset_y = e.at("y").get<std::string>();
      p.reserve_x = e.at("uX").get<Scalar>();
      p.reserve_y = e.at("uY").get<Scalar>();
      p.fee_rate = e.value("fee", 0.0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  m.validate();
  return m;
}

AtomicResult atomic_arbitrage(const TwoExchangeMarket& market, Scalar budget) {
  check_budget(budget);
  TwoExchangeMarket m = market;
  AtomicResult r;
  r.buy_exchange = cheaper(m);
  r.held = buy_y(m.pool(r.buy_exchange), budget);
  r.aarb = sell_y(m.pool(1 - r.buy_exchange), r.held) - budget;
  return r;
}

ArbOutcome non_atomic_arbitrage(const TwoExchangeMarket& market, Scalar budget,
                                const TradeStream& stream, int i) {
  check_budget(budget);
  if (i < 0) throw ConfigError("intermediary count must be >= 0");
  if (stream.size() < i) {
    throw UsageError("stream has " + std::to_string(stream.size()) + " events, " +
                     std::to_string(i) + " requested (short by " +
                     std::to_string(i - stream.size()) + ")");
  }
  ArbOutcome out;
  out.i = i;
  out.aarb = atomic_arbitrage(market, budget).aarb;

  TwoExchangeMarket m = market;
  const int buy = cheaper(m);
  const Scalar held = buy_y(m.pool(buy), budget);
  const Scalar before = mean_price(m);
  Scalar last = 0.0;
  const auto& events = stream.events();
  for (int k = 0; k < i; ++k) {
    last = apply_event(m, events[k], k > 0 ? &events[k - 1] : nullptr, last);
  }
  const Scalar after = mean_price(m);
  out.naarb = sell_y(m.pool(1 - buy), held) - budget;
  out.hv = held * (after - before);
  out.profit_difference = out.aarb - (out.naarb - out.hv);
  return out;
}

Scalar optimal_budget(const TwoExchangeMarket& market) {
  const int buy = cheaper(market);
  const ConstantProductAmm& p1 = market.pool(buy);
  const ConstantProductAmm& p2 = market.pool(1 - buy);
  const Scalar g1 = 1.0 - p1.fee_rate, g2 = 1.0 - p2.fee_rate;
  // X -> Y -> X through two constant-product pools is itself constant product
  // in the input: out(a) = N a / (D + M a).
  const Scalar N = g1 * g2 * p2.reserve_x * p1.reserve_y;
  const Scalar D = p1.reserve_x * p2.reserve_y;
  const Scalar M = g1 * (p2.reserve_y + g2 * p1.reserve_y);
  const Scalar a = (std::sqrt(N * D) - D) / M;
  return a > 0.0 ? a : 0.0;
}

}  // namespace flashopt::atomicity
