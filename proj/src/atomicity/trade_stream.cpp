#include "flashopt/atomicity/trade_stream.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "flashopt/models/amm_math.hpp"

namespace flashopt::atomicity {

TradeStream::TradeStream(std::vector<TradeEvent> events) : events_(std::move(events)) {
  for (std::size_t k = 0; k < events_.size(); ++k) {
    const auto& e = events_[k];
    if (!e.mirror_previous && !(e.amount > 0.0 && std::isfinite(e.amount))) {
      throw ConfigError("event " + std::to_string(k) + ": amount must be > 0");
    }
    if (e.mirror_previous && k == 0) throw ConfigError("first event cannot mirror");
  }
}

TradeStream TradeStream::synthetic(const TwoExchangeMarket& market, const SyntheticParams& params,
                                   std::uint64_t seed, int length) {
  if (length < 0) throw ConfigError("stream length must be >= 0");
  Rng rng(seed);
  std::vector<TradeEvent> events;
  events.reserve(static_cast<std::size_t>(length));
  while (static_cast<int>(events.size()) < length) {
    TradeEvent e;
    e.exchange = rng.uniform() < params.prob_a ? 0 : 1;
    e.direction = rng.uniform() < params.prob_x_to_y ? Direction::x_to_y : Direction::y_to_x;
    const auto& pool = market.pool(e.exchange);
    const Scalar reserve = e.direction == Direction::x_to_y ? pool.reserve_x : pool.reserve_y;
    e.amount = reserve * std::exp(params.log_mean + params.log_sd * rng.normal());
    events.push_back(e);
    if (params.neutral && static_cast<int>(events.size()) < length) {
      TradeEvent back;
      back.exchange = e.exchange;
      back.direction = e.direction == Direction::x_to_y ? Direction::y_to_x : Direction::x_to_y;
      back.mirror_previous = true;
      events.push_back(back);
    }
  }
  return TradeStream(std::move(events));
}

TradeStream TradeStream::replay(std::istream& in, const TwoExchangeMarket& market,
                                const std::string& origin) {
  std::vector<TradeEvent> events;
  std::string line;
  int lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) {
      const auto b = f.find_first_not_of(" \t");
      const auto e = f.find_last_not_of(" \t");
      fields.push_back(b == std::string::npos ? "" : f.substr(b, e - b + 1));
    }
    const bool header = first_content && fields.size() == 4 && fields[0] == "block_index";
    first_content = false;
    if (header) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (fields.size() != 4) throw ParseError(where + ": expected 4 comma-separated fields");
    TradeEvent ev;
    ev.exchange = market.index_of(fields[1]);
    if (fields[2] == "XY") {
      ev.direction = Direction::x_to_y;
    } else if (fields[2] == "YX") {
      ev.direction = Direction::y_to_x;
    } else {
      throw ParseError(where + ": direction must be XY or YX");
    }
    try {
      std::size_t used = 0;
      (void)std::stol(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("block");
      ev.amount = std::stod(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument("amount");
    } catch (const std::exception&) {
      throw ParseError(where + ": malformed block index or amount");
    }
    if (!(ev.amount > 0.0) || !std::isfinite(ev.amount)) {
      throw ParseError(where + ": amount must be > 0");
    }
    events.push_back(ev);
  }
  return TradeStream(std::move(events));
}

TradeStream TradeStream::replay_file(const std::filesystem::path& path,
                                     const TwoExchangeMarket& market) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return replay(in, market, path.string());
}

TradeStream TradeStream::window(int offset, int count) const {
  if (offset < 0 || count < 0 || offset + count > size()) {
    throw UsageError("window [" + std::to_string(offset) + ", " +
                     std::to_string(offset + count) + ") exceeds stream of " +
                     std::to_string(size()) + " events");
  }
  std::vector<TradeEvent> out(events_.begin() + offset, events_.begin() + offset + count);
  // A mirror cannot open a window; it becomes a no-op.
  if (!out.empty() && out.front().mirror_previous) {
    out.front().mirror_previous = false;
    out.front().exchange = -1;
    out.front().amount = 1.0;
  }
  return TradeStream(std::move(out));
}

Scalar apply_event(TwoExchangeMarket& market, const TradeEvent& event, const TradeEvent* previous,
                   Scalar last_output) {
  int exchange = event.exchange;
  Scalar amount = event.amount;
  Direction direction = event.direction;
  if (event.mirror_previous) {
    if (previous == nullptr || previous->exchange < 0 || last_output <= 0.0) return 0.0;
    exchange = previous->exchange;
    amount = last_output;
    direction =
        previous->direction == Direction::x_to_y ? Direction::y_to_x : Direction::x_to_y;
  }
  if (exchange < 0) return 0.0;
  auto& pool = market.pool(exchange);
  if (direction == Direction::x_to_y) {
    const Scalar out =
        models::constant_product_output(pool.reserve_x, pool.reserve_y, amount, pool.fee_rate);
    pool.reserve_x += amount;
    pool.reserve_y -= out;
    return out;
  }
  const Scalar out =
      models::constant_product_output(pool.reserve_y, pool.reserve_x, amount, pool.fee_rate);
  pool.reserve_y += amount;
  pool.reserve_x -= out;
  return out;
}

}  // namespace flashopt::atomicity
