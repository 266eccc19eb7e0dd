#include "flashopt/composer/builtin_vectors.hpp"

#include <algorithm>
#include <cmath>

#include "flashopt/models/amm_math.hpp"

namespace flashopt::composer {

using namespace models;

namespace {

Scalar unit_scale(Scalar constant) { return std::max(1.0, std::abs(constant)); }

void apply_upper_overrides(AttackVector& v, const BuiltinOptions& options) {
  for (const auto& [name, value] : options.upper) {
    auto it = std::find_if(v.params.begin(), v.params.end(),
                           [&](const ParamSpec& p) { return p.name == name; });
    if (it == v.params.end()) {
      throw ConfigError("vector '" + v.name + "' has no parameter '" + name + "'");
    }
    if (!(value >= it->lower)) {
      throw ConfigError("upper bound for " + name + " is below its lower bound");
    }
    it->upper = value;
  }
}

BorrowCap cap_for(DebtCapMode mode) {
  return mode == DebtCapMode::clamp ? BorrowCap::clamp : BorrowCap::residual;
}

EndpointCall call(Endpoint e, PoolId pool, std::optional<Binding> amount,
                  std::vector<std::string> exported = {}) {
  EndpointCall c;
  c.endpoint = e;
  c.pool = std::move(pool);
  c.amount = std::move(amount);
  c.exported = std::move(exported);
  return c;
}

bool has_position(const LendingPool& pool, const EntityId& trader) {
  return pool.first_position(trader) != nullptr;
}

}  // namespace

DebtCapMode debt_cap_mode_from_name(const std::string& name) {
  if (name == "residual") return DebtCapMode::residual;
  if (name == "clamp") return DebtCapMode::clamp;
  if (name == "ignored") return DebtCapMode::ignored;
  throw ConfigError("unknown debt cap mode '" + name + "' (residual, clamp, ignored)");
}

const char* debt_cap_mode_name(DebtCapMode mode) {
  switch (mode) {
    case DebtCapMode::residual: return "residual";
    case DebtCapMode::clamp: return "clamp";
    case DebtCapMode::ignored: return "ignored";
  }
  return "?";
}

// ---------------------------------------------------------------------------

AttackVector build_paa_vector(const Scenario& scenario, const BuiltinOptions& options) {
  const WorldState& s0 = scenario.state;
  const PoolId loan_id = unique_pool<FlashLoanPool>(s0, "flash loan");
  const PoolId lending_id = unique_pool<LendingPool>(s0, "lending");
  const PoolId amm_id = unique_pool<ConstantProductAmm>(s0, "constant product AMM");
  const PoolId margin_id = unique_pool<MarginPlatform>(s0, "margin");
  const PoolId market_id = unique_pool<FixedPriceMarket>(s0, "fixed price");
  const auto& loan = s0.pool_as<FlashLoanPool>(loan_id);
  const auto& lending = s0.pool_as<LendingPool>(lending_id);

  AttackVector v;
  v.name = "paa";
  v.trader = scenario.adversary;
  v.objective = {scenario.adversary, loan.asset};
  v.params = {{"p1", 0.0, loan.available}, {"p2", 0.0, loan.available}};
  if (options.debt_cap == DebtCapMode::ignored) v.ignored.insert("zY");

  EndpointCall borrow = call(Endpoint::collateralized_borrow, lending_id, ParamRef{0}, {"debt_cap"});
  borrow.cap = cap_for(options.debt_cap);
  v.steps = {
      {"flash loan", {call(Endpoint::flash_loan, loan_id, ParamSum{{0, 1}}, {"loan_cap"})}},
      {"collateralized borrow", {borrow}},
      {"margin short", {call(Endpoint::margin_short, margin_id, ParamRef{1}, {"margin_liquidity"})}},
      {"dump borrowed asset",
       {call(Endpoint::amm_swap_y_for_x, amm_id, AllHeld{lending.debt_asset})}},
      {"flash repay",
       {call(Endpoint::flash_repay, loan_id, LoanOutstanding{loan_id}, {"repay_balance"})}},
      {"buy back and close",
       {call(Endpoint::sell_x_for_y_fixed, market_id, DebtBuyback{lending_id, market_id}),
        call(Endpoint::collateralized_repay, lending_id, std::nullopt)}},
  };
  apply_upper_overrides(v, options);

  const EntityId trader = scenario.adversary;
  const DebtCapMode mode = options.debt_cap;
  v.closed_form = [=](const WorldState& s) -> std::optional<ClosedForm> {
    const auto& fl = s.pool_as<FlashLoanPool>(loan_id);
    const auto& lp = s.pool_as<LendingPool>(lending_id);
    const auto& amm = s.pool_as<ConstantProductAmm>(amm_id);
    const auto& mp = s.pool_as<MarginPlatform>(margin_id);
    const auto& mk = s.pool_as<FixedPriceMarket>(market_id);
    const AssetId& x = fl.asset;
    const AssetId& y = lp.debt_asset;
    if (lp.collateral_asset != x || amm.asset_x != x || amm.asset_y != y ||
        mp.collateral_asset != x || mp.short_asset != y || mk.asset_x != x || mk.asset_y != y) {
      return std::nullopt;
    }
    if (amm.fee_rate != 0.0 || mp.venue != amm_id) return std::nullopt;
    if (has_position(lp, trader) || fl.outstanding_of(trader) != 0.0) return std::nullopt;

    const Scalar vx = fl.available, zy = lp.available_debt, wx = mp.available_x;
    const Scalar er = lending_exchange_rate(s, lending_id);
    const Scalar cf = lp.collateral_factor, pm = mk.price;
    const Scalar lev = mp.leverage / mp.over_collateral_ratio;
    const Scalar ux0 = amm.reserve_x, uy0 = amm.reserve_y;
    const Scalar bx0 = s.balance(trader, x), by0 = s.balance(trader, y);
    const InterestModel interest = fl.interest;
    const bool has_vx = std::isfinite(vx);
    const bool has_zy = std::isfinite(zy) && mode != DebtCapMode::ignored;
    const bool has_wx = std::isfinite(wx);

    ClosedForm cf_out;
    std::vector<Scalar> scales;
    if (has_vx) scales.push_back(unit_scale(vx));
    if (has_zy) scales.push_back(unit_scale(zy));
    if (has_wx) scales.push_back(unit_scale(wx));
    scales.push_back(unit_scale(bx0 + ux0));
    cf_out.scales = Eigen::Map<Vector>(scales.data(), static_cast<Eigen::Index>(scales.size()));
    cf_out.evaluate = [=](const Vector& p, ClosedFormValue& out) {
      const Scalar p1 = p[0], p2 = p[1];
      Scalar b = p1 * cf / er;
      if (mode == DebtCapMode::clamp) b = std::min(b, zy);
      const Scalar lv = p2 * lev;
      const Scalar locked = constant_product_output(ux0, uy0, lv, 0.0);
      const Scalar ux1 = ux0 + lv, uy1 = uy0 - locked;
      const Scalar eth_out = constant_product_output(uy1, ux1, by0 + b, 0.0);
      const Scalar lent = p1 + p2;
      const Scalar fee = interest.fee(lent);
      out.constraints.resize(static_cast<Eigen::Index>(scales.size()));
      Eigen::Index k = 0;
      if (has_vx) out.constraints[k++] = vx - lent;
      if (has_zy) out.constraints[k++] = zy - b;
      if (has_wx) out.constraints[k++] = wx + p2 - lv;
      out.constraints[k++] = bx0 + eth_out - lent - fee;
      out.objective = eth_out - p2 - fee - b * pm;
    };
    return cf_out;
  };
  v.validate();
  return v;
}

// ---------------------------------------------------------------------------

AttackVector build_oracle_vector(const Scenario& scenario, const BuiltinOptions& options) {
  const WorldState& s0 = scenario.state;
  const PoolId loan_id = unique_pool<FlashLoanPool>(s0, "flash loan");
  const PoolId amm_id = unique_pool<ConstantProductAmm>(s0, "constant product AMM");
  const PoolId reserve_id = unique_pool<AutomatedPriceReserve>(s0, "price reserve");
  const PoolId market_id = unique_pool<FixedPriceMarket>(s0, "fixed price");
  const PoolId lending_id = unique_pool<LendingPool>(s0, "lending");
  const auto& loan = s0.pool_as<FlashLoanPool>(loan_id);
  const auto& lending = s0.pool_as<LendingPool>(lending_id);
  const auto& reserve = s0.pool_as<AutomatedPriceReserve>(reserve_id);

  AttackVector v;
  v.name = "oracle";
  v.trader = scenario.adversary;
  v.objective = {scenario.adversary, loan.asset};
  v.params = {{"p1", 0.0, loan.available}, {"p2", 0.0, loan.available},
              {"p3", 0.0, loan.available}};
  if (options.debt_cap == DebtCapMode::ignored) v.ignored.insert("zY");

  EndpointCall borrow = call(Endpoint::collateralized_borrow, lending_id,
                             AllHeld{lending.collateral_asset}, {"debt_cap"});
  borrow.cap = cap_for(options.debt_cap);
  v.steps = {
      {"flash loan", {call(Endpoint::flash_loan, loan_id, ParamSum{{0, 1, 2}}, {"loan_cap"})}},
      {"buy on AMM", {call(Endpoint::amm_swap_x_for_y, amm_id, ParamRef{0})}},
      {"buy at reserve",
       {call(Endpoint::reserve_convert_x_to_y, reserve_id, ParamRef{1}, {"reserve_max_price"})}},
      {"buy at fixed price", {call(Endpoint::sell_x_for_y_fixed, market_id, ParamRef{2}, {"max_y"})}},
      {"collateralized borrow", {borrow}},
      {"flash repay", {call(Endpoint::flash_repay, loan_id, LoanOutstanding{loan_id})}},
  };
  apply_upper_overrides(v, options);
  // e^(lr * k) overflows long before any realistic bound; keep it representable.
  if (reserve.liquidity_rate > 0.0) {
    v.params[1].upper =
        std::min(v.params[1].upper,
                 std::max(v.params[1].lower, 50.0 / reserve.liquidity_rate - reserve.inventory_x));
  }

  const EntityId trader = scenario.adversary;
  const DebtCapMode mode = options.debt_cap;
  v.closed_form = [=](const WorldState& s) -> std::optional<ClosedForm> {
    const auto& fl = s.pool_as<FlashLoanPool>(loan_id);
    const auto& amm = s.pool_as<ConstantProductAmm>(amm_id);
    const auto& rs = s.pool_as<AutomatedPriceReserve>(reserve_id);
    const auto& mk = s.pool_as<FixedPriceMarket>(market_id);
    const auto& lp = s.pool_as<LendingPool>(lending_id);
    const AssetId& x = fl.asset;
    const AssetId& y = lp.collateral_asset;
    if (lp.debt_asset != x || amm.asset_x != x || amm.asset_y != y || rs.asset_x != x ||
        rs.asset_y != y || mk.asset_x != x || mk.asset_y != y) {
      return std::nullopt;
    }
    if (amm.fee_rate != 0.0) return std::nullopt;
    if (!lp.price_oracle.empty() && lp.price_oracle != amm_id) return std::nullopt;
    if (fl.outstanding_of(trader) != 0.0) return std::nullopt;

    const bool oracle_priced = !lp.price_oracle.empty();
    const Scalar er_fixed = lp.exchange_rate;
    const Scalar vx = fl.available, zy = lp.available_debt;
    const Scalar ux0 = amm.reserve_x, uy0 = amm.reserve_y;
    const Scalar lr = rs.liquidity_rate, min_p = rs.min_price, max_p = rs.max_price,
                 kx = rs.inventory_x;
    const Scalar pre_price = reserve_price(min_p, lr, kx);
    const Scalar pm = mk.price, y_left = mk.remaining_y(), max_y = mk.max_y;
    const Scalar cf = lp.collateral_factor;
    const Scalar by0 = s.balance(trader, y);
    const InterestModel interest = fl.interest;
    const bool has_vx = std::isfinite(vx);
    const bool has_maxp = std::isfinite(max_p);
    const bool has_maxy = std::isfinite(max_y);
    const bool has_zy = std::isfinite(zy) && mode != DebtCapMode::ignored;

    ClosedForm cf_out;
    std::vector<Scalar> scales;
    if (has_vx) scales.push_back(unit_scale(vx));
    if (has_maxp) scales.push_back(unit_scale(max_p));
    if (has_maxy) scales.push_back(unit_scale(max_y));
    if (has_zy) scales.push_back(unit_scale(zy));
    cf_out.scales = Eigen::Map<Vector>(scales.data(), static_cast<Eigen::Index>(scales.size()));
    cf_out.evaluate = [=](const Vector& p, ClosedFormValue& out) {
      const Scalar p1 = p[0], p2 = p[1], p3 = p[2];
      const Scalar y1 = constant_product_output(ux0, uy0, p1, 0.0);
      const Scalar y2 = reserve_output(lr, pre_price, p2);
      const Scalar y3 = p3 / pm;
      const Scalar er = oracle_priced ? (uy0 - y1) / (ux0 + p1) : er_fixed;
      Scalar borrowed = (by0 + y1 + y2 + y3) * cf / er;
      if (mode == DebtCapMode::clamp) borrowed = std::min(borrowed, zy);
      const Scalar lent = p1 + p2 + p3;
      const Scalar fee = interest.fee(lent);
      out.constraints.resize(static_cast<Eigen::Index>(scales.size()));
      Eigen::Index k = 0;
      if (has_vx) out.constraints[k++] = vx - lent;
      if (has_maxp) out.constraints[k++] = max_p - reserve_price(min_p, lr, kx + p2);
      if (has_maxy) out.constraints[k++] = y_left - y3;
      if (has_zy) out.constraints[k++] = zy - borrowed;
      out.objective = borrowed - lent - fee;
    };
    return cf_out;
  };
  v.validate();
  return v;
}

std::vector<std::string> builtin_vector_names() { return {"paa", "oracle"}; }

AttackVector build_builtin_vector(const std::string& name, const Scenario& scenario,
                                  const BuiltinOptions& options) {
  if (name == "paa") return build_paa_vector(scenario, options);
  if (name == "oracle") return build_oracle_vector(scenario, options);
  throw ConfigError("unknown built-in vector '" + name + "' (paa, oracle)");
}

}  // namespace flashopt::composer
