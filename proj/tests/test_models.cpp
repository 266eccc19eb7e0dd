#include <gtest/gtest.h>

#include <cmath>

#include "flashopt/models/amm_math.hpp"
#include "flashopt/models/operations.hpp"
#include "flashopt/models/scenario_io.hpp"

using namespace flashopt;
using namespace flashopt::models;

namespace {

Scenario parse(const char* text) { return scenario_from_json(parse_json_text(text, "inline")); }

const char* kTwoPools = R"({
  "name": "t", "adversary": "a", "assets": ["ETH", "TOK"],
  "balances": {"a": {"ETH": 100, "TOK": 0}},
  "pools": {
    "loan": {"type": "flash_loan", "asset": "ETH", "vX": 1000},
    "amm": {"type": "constant_product_amm", "x": "ETH", "y": "TOK", "uX": 10, "uY": 10, "fee": 0},
    "lend": {"type": "lending", "collateral": "ETH", "debt": "TOK", "cf": 0.75, "er": 2, "zY": 30},
    "fix": {"type": "fixed_price", "x": "ETH", "y": "TOK", "pm": 4, "maxY": 5},
    "res": {"type": "price_reserve", "x": "ETH", "y": "TOK", "lr": 0.01, "minP": 0.5, "maxP": 2, "kX": 0}
  }
})";

const Residual* find(const std::vector<Residual>& rs, const std::string& key) {
  for (const auto& r : rs) {
    if (r.key == key) return &r;
  }
  return nullptr;
}

}  // namespace

TEST(AmmMath, TextbookSwap) {
  // 10 ETH into a 10/10 pool: 10*10 = 20*5
  EXPECT_DOUBLE_EQ(constant_product_output(10.0, 10.0, 10.0), 5.0);
  EXPECT_DOUBLE_EQ(slippage(1.0, 10.0 / 5.0), 1.0);
}

TEST(AmmMath, FeeOnInput) {
  const double out = constant_product_output(1000.0, 500.0, 100.0, 0.003);
  const double eff = 100.0 * 0.997;
  EXPECT_NEAR(out, 500.0 - 1000.0 * 500.0 / (1000.0 + eff), 1e-12);
}

TEST(AmmMath, ReserveOutputIntegratesPrice) {
  // Y out = integral_0^a dk / (P e^{lr k})
  const double lr = 0.00252, p = 0.0037 * std::exp(lr * 0.90658), a = 360.0;
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double k = (i + 0.5) * a / n;
    sum += a / n / (p * std::exp(lr * k));
  }
  EXPECT_NEAR(reserve_output(lr, p, a), sum, 1e-6 * sum);
  EXPECT_GT(reserve_output(lr, p, 1.0), 0.0);
}

TEST(Operations, FlashLoanCapResidual) {
  const auto sc = parse(kTwoPools);
  const auto t = flash_loan(sc.state, "loan", "a", 1200.0);
  const auto* r = find(t.residuals, "loan_cap");
  ASSERT_NE(r, nullptr);
  EXPECT_DOUBLE_EQ(r->value, -200.0);
  EXPECT_DOUBLE_EQ(r->scale, 1000.0);
  EXPECT_DOUBLE_EQ(t.state.balance("a", "ETH"), 1300.0);
  EXPECT_THROW(flash_loan(sc.state, "loan", "a", 1200.0, ExecutionMode::strict),
               ConstraintViolation);
}

TEST(Operations, SwapConservesProductAndValue) {
  const auto sc = parse(kTwoPools);
  const auto t = amm_swap_x_for_y(sc.state, "amm", "a", 10.0);
  const auto& amm = t.state.pool_as<ConstantProductAmm>("amm");
  EXPECT_DOUBLE_EQ(amm.reserve_x * amm.reserve_y, 100.0);
  EXPECT_DOUBLE_EQ(t.state.balance("a", "TOK"), 5.0);
  EXPECT_DOUBLE_EQ(t.state.balance("a", "ETH"), 90.0);
  EXPECT_EQ(t.state.step_index(), 1);
  // the input state is untouched
  EXPECT_DOUBLE_EQ(sc.state.pool_as<ConstantProductAmm>("amm").reserve_x, 10.0);
}

TEST(Operations, OverspendIsAResidualNotAnError) {
  const auto sc = parse(kTwoPools);
  const auto t = amm_swap_x_for_y(sc.state, "amm", "a", 150.0);
  EXPECT_DOUBLE_EQ(find(t.residuals, "balance")->value, -50.0);
  EXPECT_THROW(amm_swap_x_for_y(sc.state, "amm", "a", 150.0, ExecutionMode::strict),
               ConstraintViolation);
}

TEST(Operations, BorrowUsesCollateralFactor) {
  const auto sc = parse(kTwoPools);
  const auto t = collateralized_borrow(sc.state, "lend", "a", 100.0);
  EXPECT_DOUBLE_EQ(t.state.balance("a", "TOK"), 100.0 * 0.75 / 2.0);
  EXPECT_DOUBLE_EQ(find(t.residuals, "debt_cap")->value, 30.0 - 37.5);
  const auto c = collateralized_borrow(sc.state, "lend", "a", 100.0, ExecutionMode::relaxed,
                                       BorrowCap::clamp);
  EXPECT_DOUBLE_EQ(c.state.balance("a", "TOK"), 30.0);
}

TEST(Operations, RepayRestoresCollateral) {
  const auto sc = parse(kTwoPools);
  const auto b = collateralized_borrow(sc.state, "lend", "a", 40.0);
  const auto r = collateralized_repay(b.state, "lend", "a");
  EXPECT_DOUBLE_EQ(r.state.balance("a", "ETH"), 100.0);
  EXPECT_DOUBLE_EQ(r.state.balance("a", "TOK"), 0.0);
  EXPECT_THROW(collateralized_repay(sc.state, "lend", "a"), UsageError);
}

TEST(Operations, FixedPriceCap) {
  const auto sc = parse(kTwoPools);
  const auto t = sell_x_for_y_fixed(sc.state, "fix", "a", 24.0);
  EXPECT_DOUBLE_EQ(t.state.balance("a", "TOK"), 6.0);
  EXPECT_DOUBLE_EQ(find(t.residuals, "max_y")->value, -1.0);
}

TEST(Operations, ReserveMovesPriceUp) {
  const auto sc = parse(kTwoPools);
  const double before = reserve_price_y(sc.state, "res");
  const auto t = reserve_convert_x_to_y(sc.state, "res", "a", 50.0);
  EXPECT_NEAR(reserve_price_y(t.state, "res"), before * std::exp(0.5), 1e-12);
  EXPECT_NEAR(find(t.residuals, "reserve_max_price")->value, 2.0 - 0.5 * std::exp(0.5), 1e-12);
}

TEST(Operations, WrongPoolKind) {
  const auto sc = parse(kTwoPools);
  EXPECT_THROW(amm_swap_x_for_y(sc.state, "loan", "a", 1.0), ConfigError);
  EXPECT_THROW(amm_swap_x_for_y(sc.state, "nope", "a", 1.0), ConfigError);
}

TEST(Operations, NegativeAmountRejected) {
  const auto sc = parse(kTwoPools);
  EXPECT_ANY_THROW(amm_swap_x_for_y(sc.state, "amm", "a", -1.0));
}

TEST(Operations, RepayWithInterest) {
  const auto sc = parse(kTwoPools);
  const auto l = flash_loan(sc.state, "loan", "a", 500.0);
  const auto r = flash_repay(l.state, "loan", "a", 500.0);
  EXPECT_DOUBLE_EQ(r.state.balance("a", "ETH"), 100.0);
  EXPECT_DOUBLE_EQ(find(r.residuals, "repay_balance")->value, 100.0);
}

TEST(Operations, MarginShortOnVenue) {
  const auto sc = bundled_scenario("paa");
  const auto s = sc.state.with_balance("adversary", "ETH", 1300.0);
  const auto t = margin_short(s, "bzx", "adversary", 1300.0);
  const double principal = 1300.0 * 5 / 1.153;
  const double locked = principal * 77.08 / (2817.77 + principal);
  EXPECT_NEAR(t.state.pool_as<MarginPlatform>("bzx").locked_of("adversary"), locked, 1e-9);
  EXPECT_NEAR(find(t.residuals, "margin_liquidity")->value, 4858.74 + 1300.0 - principal, 1e-9);
}

TEST(ScenarioIo, RoundTrip) {
  for (const char* name : {"paa", "oracle"}) {
    const auto sc = bundled_scenario(name);
    const auto again = scenario_from_json(scenario_to_json(sc));
    EXPECT_EQ(again.state, sc.state) << name;
  }
}

TEST(ScenarioIo, Diagnostics) {
  EXPECT_THROW(parse(R"({"name": "x", "adversary": "a", "pools": {"p": {"type": "warp"}}})"),
               ParseError);
  EXPECT_THROW(parse_json_text("{ nope", "bad.json"), ParseError);
}
