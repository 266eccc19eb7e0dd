#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "flashopt/atomicity/sweep.hpp"
#include "flashopt/models/scenario_io.hpp"

using namespace flashopt;
using namespace flashopt::atomicity;

namespace {

TwoExchangeMarket market(double ax, double ay, double bx, double by, double fee = 0.0) {
  TwoExchangeMarket m;
  m.a = {"DAI", "ETH", ax, ay, fee};
  m.b = {"DAI", "ETH", bx, by, fee};
  m.validate();
  return m;
}

double cp(double rin, double rout, double in) { return in * rout / (rin + in); }

}  // namespace

TEST(Arbitrage, AtomicMatchesHandComputation) {
  const auto m = market(350000, 1000, 707000, 2000);
  const double budget = 1000.0;
  const double y = cp(350000, 1000, budget);
  const double back = cp(2000, 707000, y);
  const auto r = atomic_arbitrage(m, budget);
  EXPECT_EQ(r.buy_exchange, 0);
  EXPECT_NEAR(r.held, y, 1e-12);
  EXPECT_NEAR(r.aarb, back - budget, 1e-9);
}

TEST(Arbitrage, BuysOnTheCheaperSide) {
  EXPECT_EQ(atomic_arbitrage(market(707000, 2000, 350000, 1000), 10).buy_exchange, 1);
  EXPECT_EQ(atomic_arbitrage(market(1, 1, 1, 1), 0.1).buy_exchange, 0);
}

TEST(Arbitrage, OptimalBudgetIsAStationaryPoint) {
  for (double fee : {0.0, 0.003}) {
    const auto m = market(350000, 1000, 707000, 2000, fee);
    const double a = optimal_budget(m);
    ASSERT_GT(a, 0.0);
    const double f = atomic_arbitrage(m, a).aarb;
    EXPECT_GE(f, atomic_arbitrage(m, a * 1.01).aarb);
    EXPECT_GE(f, atomic_arbitrage(m, a * 0.99).aarb);
  }
  EXPECT_EQ(optimal_budget(market(1000, 1000, 1000, 1000)), 0.0);
}

TEST(Arbitrage, ZeroIntermediariesIsAtomic) {
  const auto m = market(350000, 1000, 707000, 2000);
  const auto s = TradeStream::synthetic(m, {}, 4, 20);
  const auto o = non_atomic_arbitrage(m, 500.0, s, 0);
  EXPECT_EQ(o.profit_difference, 0.0);
  EXPECT_EQ(o.hv, 0.0);
  EXPECT_EQ(o.aarb, o.naarb);
}

TEST(Arbitrage, ProfitDifferenceIdentity) {
  const auto m = market(350000, 1000, 707000, 2000);
  const auto s = TradeStream::synthetic(m, {}, 11, 200);
  for (int i : {1, 5, 50, 200}) {
    const auto o = non_atomic_arbitrage(m, 700.0, s, i);
    EXPECT_EQ(o.profit_difference, o.aarb - (o.naarb - o.hv));
  }
  EXPECT_THROW(non_atomic_arbitrage(m, 700.0, s, 201), UsageError);
}

TEST(Arbitrage, NeutralStreamCancelsOnPairs) {
  const auto m = market(350000, 1000, 707000, 2000);
  SyntheticParams p;
  p.neutral = true;
  const auto s = TradeStream::synthetic(m, p, 8, 400);
  for (int i : {2, 20, 400}) {
    const auto o = non_atomic_arbitrage(m, 700.0, s, i);
    EXPECT_NEAR(o.profit_difference, 0.0, 1e-6) << i;
  }
}

TEST(TradeStream, ReplayParsesAndReportsLines) {
  const auto m = market(350000, 1000, 707000, 2000);
  std::istringstream ok("block_index,exchange_id,direction,amount\n# c\n1,A,XY,10\n2,Z,YX,1\n");
  const auto s = TradeStream::replay(ok, m);
  ASSERT_EQ(s.size(), 2);
  EXPECT_EQ(s.events()[0].exchange, 0);
  EXPECT_EQ(s.events()[1].exchange, -1);

  std::istringstream bad("1,A,XY,10\n2,A,UP,1\n");
  try {
    TradeStream::replay(bad, m, "t.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("t.csv:2"), std::string::npos) << e.what();
  }
}

TEST(TradeStream, WindowDropsLeadingMirror) {
  std::vector<TradeEvent> ev(3);
  ev[0].amount = ev[2].amount = 1.0;
  ev[1].mirror_previous = true;
  const TradeStream s(ev);
  const auto w = s.window(1, 2);
  EXPECT_FALSE(w.events()[0].mirror_previous);
  EXPECT_EQ(w.events()[0].exchange, -1);
  EXPECT_THROW(s.window(2, 2), UsageError);
}

TEST(TradeStream, SeededSyntheticIsReproducible) {
  const auto m = market(350000, 1000, 707000, 2000);
  const auto a = TradeStream::synthetic(m, {}, 77, 50);
  const auto b = TradeStream::synthetic(m, {}, 77, 50);
  for (int k = 0; k < 50; ++k) EXPECT_EQ(a.events()[k].amount, b.events()[k].amount);
}

TEST(Sweep, BootstrapOfConstantIsConstant) {
  const auto ci = bootstrap_ci(std::vector<double>(30, 2.5), 200, 1);
  EXPECT_EQ(ci.first, 2.5);
  EXPECT_EQ(ci.second, 2.5);
  EXPECT_THROW(bootstrap_ci({}, 10, 1), ConfigError);
}

TEST(Sweep, RowsAndCsv) {
  const auto m = market(350000, 1000, 707000, 2000);
  SweepConfig c;
  c.i_values = {0, 10};
  c.trials = 20;
  c.bootstrap_samples = 100;
  const auto rows = sweep(m, optimal_budget(m), synthetic_factory(m, {}, 3), c);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].mean, 0.0);
  EXPECT_LE(rows[1].ci_low, rows[1].mean);
  EXPECT_GE(rows[1].ci_high, rows[1].mean);
  std::ostringstream out;
  write_sweep_csv(out, rows);
  EXPECT_EQ(out.str().substr(0, 29), "i,mean,ci_low,ci_high,trials\n");
}

TEST(Sweep, ReplayTooShort) {
  const auto m = market(350000, 1000, 707000, 2000);
  const auto f = replay_factory(TradeStream::synthetic(m, {}, 1, 5));
  EXPECT_THROW(f(0, 6), UsageError);
  EXPECT_EQ(f(3, 5).size(), 5);
}

TEST(Market, LoadBundled) {
  const auto m = load_market(models::data_dir() / "markets" / "dai_eth.json");
  EXPECT_EQ(m.a.asset_x, "DAI");
  EXPECT_NEAR(m.b.reserve_x / m.b.reserve_y / (m.a.reserve_x / m.a.reserve_y), 1.01, 1e-12);
}
