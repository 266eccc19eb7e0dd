#include "flashopt/models/scenario_io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace flashopt::models {

using nlohmann::json;

namespace {

class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ParseError(path_ + ": expected an object");
  }

  bool has(const char* key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }

  Scalar number(const char* key) const {
    if (!obj_.contains(key)) throw ParseError(path_ + "." + key + ": missing field");
    const json& v = obj_.at(key);
    if (!v.is_number()) throw ParseError(path_ + "." + key + ": expected a number");
    return v.get<Scalar>();
  }

  Scalar number_or(const char* key, Scalar fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::string text(const char* key) const {
    if (!obj_.contains(key)) throw ParseError(path_ + "." + key + ": missing field");
    const json& v = obj_.at(key);
    if (!v.is_string()) throw ParseError(path_ + "." + key + ": expected a string");
    return v.get<std::string>();
  }

  std::string text_or(const char* key, std::string fallback) const {
    return has(key) ? text(key) : fallback;
  }

  const std::string& path() const { return path_; }

 private:
  const json& obj_;
  std::string path_;
};

Pool parse_pool(const json& stanza, const std::string& path) {
  Fields f(stanza, path);
  const std::string type = f.text("type");
  if (type == "flash_loan") {
    FlashLoanPool p;
    p.asset = f.text("asset");
    p.available = f.number("vX");
    if (f.has("interest_fee")) {
      p.interest = InterestModel::fixed(f.number("interest_fee"));
    } else {
      p.interest = InterestModel::rate(f.number_or("interest_rate", 0.0));
    }
    return p;
  }
  if (type == "constant_product_amm") {
    ConstantProductAmm p;
    p.asset_x = f.text("x");
    p.asset_y = f.text("y");
    p.reserve_x = f.number("uX");
    p.reserve_y = f.number("uY");
    p.fee_rate = f.number_or("fee", 0.0);
    return p;
  }
  if (type == "price_reserve") {
    AutomatedPriceReserve p;
    p.asset_x = f.text("x");
    p.asset_y = f.text("y");
    p.inventory_x = f.number("kX");
    p.liquidity_rate = f.number("lr");
    p.min_price = f.number("minP");
    p.max_price = f.number_or("maxP", kInfinity);
    return p;
  }
  if (type == "fixed_price") {
    FixedPriceMarket p;
    p.asset_x = f.text("x");
    p.asset_y = f.text("y");
    p.price = f.number("pm");
    p.max_y = f.number_or("maxY", kInfinity);
    return p;
  }
  if (type == "lending") {
    LendingPool p;
    p.collateral_asset = f.text("collateral");
    p.debt_asset = f.text("debt");
    p.collateral_factor = f.number("cf");
    p.price_oracle = f.text_or("oracle", "");
    if (p.price_oracle.empty()) p.exchange_rate = f.number("er");
    p.available_debt = f.number_or("zY", kInfinity);
    return p;
  }
  if (type == "margin") {
    MarginPlatform p;
    p.collateral_asset = f.text("collateral");
    p.short_asset = f.text("short");
    p.leverage = f.number("leverage");
    p.over_collateral_ratio = f.number("ocr");
    p.available_x = f.number_or("wX", kInfinity);
    p.venue = f.text_or("venue", "");
    if (f.has("emp")) p.external_price = f.number("emp");
    return p;
  }
  throw ParseError(path + ".type: unknown pool type '" + type + "'");
}

// JSON cannot carry infinity; absent caps mean "unbounded".
void put_finite(json& out, const char* key, Scalar v) {
  if (std::isfinite(v)) out[key] = v;
}

json pool_to_json(const Pool& pool) {
  json out;
  out["type"] = pool_kind_name(pool);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FlashLoanPool>) {
          out["asset"] = p.asset;
          put_finite(out, "vX", p.available);
          if (p.interest.kind == InterestModel::Kind::fixed) {
            out["interest_fee"] = p.interest.value;
          } else {
            out["interest_rate"] = p.interest.value;
          }
        } else if constexpr (std::is_same_v<T, ConstantProductAmm>) {
          out["x"] = p.asset_x;
          out["y"] = p.asset_y;
          out["uX"] = p.reserve_x;
          out["uY"] = p.reserve_y;
          out["fee"] = p.fee_rate;
        } else if constexpr (std::is_same_v<T, AutomatedPriceReserve>) {
          out["x"] = p.asset_x;
          out["y"] = p.asset_y;
          out["kX"] = p.inventory_x;
          out["lr"] = p.liquidity_rate;
          out["minP"] = p.min_price;
          put_finite(out, "maxP", p.max_price);
        } else if constexpr (std::is_same_v<T, FixedPriceMarket>) {
          out["x"] = p.asset_x;
          out["y"] = p.asset_y;
          out["pm"] = p.price;
          put_finite(out, "maxY", p.max_y);
        } else if constexpr (std::is_same_v<T, LendingPool>) {
          out["collateral"] = p.collateral_asset;
          out["debt"] = p.debt_asset;
          out["cf"] = p.collateral_factor;
          if (p.price_oracle.empty()) {
            out["er"] = p.exchange_rate;
          } else {
            out["oracle"] = p.price_oracle;
          }
          put_finite(out, "zY", p.available_debt);
        } else if constexpr (std::is_same_v<T, MarginPlatform>) {
          out["collateral"] = p.collateral_asset;
          out["short"] = p.short_asset;
          out["leverage"] = p.leverage;
          out["ocr"] = p.over_collateral_ratio;
          put_finite(out, "wX", p.available_x);
          if (!p.venue.empty()) out["venue"] = p.venue;
          if (p.external_price) out["emp"] = *p.external_price;
        }
      },
      pool);
  return out;
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
  Fields top(doc, "scenario");
  Scenario scenario;
  scenario.name = top.text_or("name", "unnamed");
  scenario.adversary = top.text_or("adversary", "adversary");

  std::vector<AssetId> assets;
  if (doc.contains("assets")) {
    if (!doc["assets"].is_array()) throw ParseError("scenario.assets: expected an array");
    for (const auto& a : doc["assets"]) {
      if (!a.is_string()) throw ParseError("scenario.assets: expected strings");
      assets.push_back(a.get<std::string>());
    }
  }
  std::vector<EntityId> entities{scenario.adversary};
  BalanceLedger ledger;
  if (doc.contains("balances")) {
    const json& balances = doc["balances"];
    if (!balances.is_object()) throw ParseError("scenario.balances: expected an object");
    for (const auto& [entity, per_asset] : balances.items()) {
      Fields f(per_asset, "scenario.balances." + entity);
      if (entity != scenario.adversary) entities.push_back(entity);
      for (const auto& [asset, amount] : per_asset.items()) {
        ledger.set(entity, asset, f.number(asset.c_str()));
      }
    }
  }
  std::map<PoolId, Pool> pools;
  if (!doc.contains("pools") || !doc["pools"].is_object()) {
    throw ParseError("scenario.pools: missing or not an object");
  }
  for (const auto& [id, stanza] : doc["pools"].items()) {
    pools.emplace(id, parse_pool(stanza, "scenario.pools." + id));
  }
  try {
    scenario.state = WorldState(std::move(ledger), std::move(pools), std::move(assets),
                                std::move(entities));
  } catch (const ConfigError& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  return scenario;
}

json scenario_to_json(const Scenario& scenario) {
  json out;
  out["name"] = scenario.name;
  out["adversary"] = scenario.adversary;
  out["assets"] = scenario.state.assets();
  json balances = json::object();
  for (const auto& [key, amount] : scenario.state.ledger().entries()) {
    balances[key.first][key.second] = amount;
  }
  out["balances"] = balances;
  json pools = json::object();
  for (const auto& [id, pool] : scenario.state.pools()) pools[id] = pool_to_json(pool);
  out["pools"] = pools;
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line number for the diagnostic.
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ParseError(origin + ":" + std::to_string(line) + ": " + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return scenario_from_json(parse_json_text(text, path.string()));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("FLASHOPT_DATA_DIR")) return env;
#ifdef FLASHOPT_DATA_DIR
  return FLASHOPT_DATA_DIR;
#else
  return "data";
#endif
}

Scenario bundled_scenario(const std::string& name) {
  return load_scenario(data_dir() / "scenarios" / (name + ".json"));
}

}  // namespace flashopt::models
