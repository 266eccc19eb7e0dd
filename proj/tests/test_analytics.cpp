#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "flashopt/analytics/usage.hpp"

using namespace flashopt;
using namespace flashopt::analytics;

namespace {

const char* kUni = "0x2a1530C4C41db0B0b2bB646CB5Eb1A67b7158667";
const char* kKyber = "0x7a3370075a54B187d7bD5DceBf0ff2B5552d4F7D";
const char* kAave = "0x398eC7346DcD622eDc5ae82352F02bE94C62d119";
const char* kUnknown = "0x00000000000000000000000000000000000000aa";

LoanRecord rec(std::vector<std::string> touched, std::string asset, double amount, double gas) {
  return {"0x1", std::move(touched), std::move(asset), amount, gas};
}

}  // namespace

TEST(AddressMap, BundledLookups) {
  const auto m = AddressMap::bundled();
  EXPECT_EQ(m.size(), 45u);
  EXPECT_EQ(m.lookup("0x398eC7346DcD622eDc5ae82352F02bE94C62d119").value(), "Aave");
  EXPECT_EQ(m.lookup("0x398ec7346dcd622edc5ae82352f02be94c62d119").value(), "Aave");
  EXPECT_FALSE(m.lookup(kUnknown).has_value());
  EXPECT_THROW(m.lookup("0x1234"), ParseError);
}

TEST(AddressMap, BundledFileAgreesWithBuiltIn) {
  const auto file = AddressMap::load(std::filesystem::path(FLASHOPT_DATA_DIR) / "analytics" /
                                     "address_map.csv");
  EXPECT_EQ(file.entries(), AddressMap::bundled().entries());
}

TEST(AddressMap, ParseDiagnostics) {
  std::istringstream bad("# x\n0x398eC7346DcD622eDc5ae82352F02bE94C62d119,Aave\nnot-an-address,Foo\n");
  try {
    AddressMap::parse(bad, "map.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("map.csv:3"), std::string::npos) << e.what();
  }
}

TEST(Classify, IdempotentAndOrderInsensitive) {
  const auto m = AddressMap::bundled();
  const auto a = classify(rec({kUni, kKyber, kUni}, "ETH", 1, 1), m);
  const auto b = classify(rec({kKyber, kUni}, "ETH", 1, 1), m);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, (PlatformSet{"Kyber", "Uniswap"}));
  EXPECT_EQ(classify(rec({kUnknown}, "ETH", 1, 1), m), PlatformSet{"Unknown"});
}

TEST(Records, BadLinesAreCollected) {
  std::istringstream in(
      "{\"tx\":\"0xa\",\"touched\":[],\"asset\":\"ETH\",\"amount\":1,\"gas\":5}\n"
      "{\"tx\":\"0xb\",\"touched\":[],\"asset\":\"ETH\",\"amount\":-1}\n"
      "garbage\n");
  const auto batch = read_records(in, "r.jsonl");
  EXPECT_EQ(batch.records.size(), 1u);
  ASSERT_EQ(batch.errors.size(), 2u);
  EXPECT_EQ(batch.errors[0].line, 2);
  EXPECT_EQ(batch.errors[0].tx, "0xb");
  EXPECT_EQ(batch.errors[1].line, 3);
}

TEST(Prices, DefaultsAndOverrides) {
  const auto d = PriceTable::defaults();
  EXPECT_EQ(d.price("ETH").value(), 350.0);
  EXPECT_EQ(d.price("WBTC").value(), 10000.0);
  EXPECT_FALSE(d.price("XYZ").has_value());
  std::istringstream in("ETH,400\n# c\nXYZ,2.5\n");
  const auto p = PriceTable::parse(in);
  EXPECT_EQ(p.price("XYZ").value(), 2.5);
  std::istringstream bad("ETH,0\n");
  EXPECT_THROW(PriceTable::parse(bad), ParseError);
}

TEST(GasStats, MergeIsAssociative) {
  Rng rng(1);
  std::vector<double> xs(300);
  for (auto& x : xs) x = rng.uniform(1e5, 2e6);
  GasStats all, a, b, c;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    all.add(xs[k]);
    (k < 50 ? a : k < 170 ? b : c).add(xs[k]);
  }
  GasStats left = a, right = b;
  left.merge(b);
  left.merge(c);
  right.merge(c);
  GasStats alt = a;
  alt.merge(right);
  // two-pass reference
  double mean = 0.0, ss = 0.0;
  for (double x : xs) mean += x / xs.size();
  for (double x : xs) ss += (x - mean) * (x - mean);
  for (const auto* g : {&all, &left, &alt}) {
    EXPECT_EQ(g->n, 300);
    EXPECT_NEAR(g->mean, mean, 1e-9 * mean);
    EXPECT_NEAR(g->population_std(), std::sqrt(ss / 300), 1e-9 * std::sqrt(ss / 300));
  }
}

TEST(Usage, FoldsRareAndUnknownIntoOthers) {
  const auto m = AddressMap::bundled();
  const auto p = PriceTable::defaults();
  std::vector<LoanRecord> rs;
  for (int k = 0; k < 5; ++k) rs.push_back(rec({kAave, kUni}, "DAI", 100, 1000));
  for (int k = 0; k < 4; ++k) rs.push_back(rec({kKyber}, "ETH", 1, 3000));
  for (int k = 0; k < 6; ++k) rs.push_back(rec({kUni, kUnknown}, "ETH", 1, 2000));
  const auto t = aggregate(rs, m, p);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].label, "Aave + Uniswap");
  EXPECT_EQ(t.others.count, 10);
  EXPECT_DOUBLE_EQ(t.others.usd, 10 * 350.0);
  EXPECT_EQ(t.totals.count, 15);
  EXPECT_DOUBLE_EQ(t.totals.usd, 500.0 + 3500.0);
}

TEST(Usage, TotalsEqualColumnSums) {
  const auto m = AddressMap::bundled();
  const auto p = PriceTable::defaults();
  Rng rng(2);
  const char* pool[] = {kUni, kKyber, kAave, kUnknown};
  const char* assets[] = {"ETH", "DAI", "WBTC", "NOPE"};
  std::vector<LoanRecord> rs;
  for (int k = 0; k < 400; ++k) {
    std::vector<std::string> t;
    for (int j = 0; j < 4; ++j) {
      if (rng.uniform() < 0.4) t.push_back(pool[j]);
    }
    rs.push_back(rec(t, assets[rng.below(4)], rng.uniform(0, 10), rng.uniform(1e5, 1e6)));
  }
  const auto t = aggregate(rs, m, p);
  UsageRow sum;
  for (const auto& r : t.rows) sum.merge(r);
  sum.merge(t.others);
  EXPECT_EQ(sum.count, t.totals.count);
  EXPECT_EQ(sum.unpriced, t.totals.unpriced);
  EXPECT_NEAR(sum.usd, t.totals.usd, 1e-9 * t.totals.usd);
  EXPECT_NEAR(sum.gas.mean, t.totals.gas.mean, 1e-9 * t.totals.gas.mean);
}

TEST(Usage, ShardedMergeMatchesSinglePass) {
  const auto m = AddressMap::bundled();
  const auto p = PriceTable::defaults();
  std::vector<LoanRecord> rs;
  for (int k = 0; k < 30; ++k) rs.push_back(rec({k % 3 ? kUni : kKyber}, "ETH", k, 1000.0 * k));
  UsageAccumulator one, a, b;
  for (int k = 0; k < 30; ++k) {
    one.add(rs[k], m, p);
    (k % 2 ? a : b).add(rs[k], m, p);
  }
  a.merge(b);
  const auto x = one.table(), y = a.table();
  ASSERT_EQ(x.rows.size(), y.rows.size());
  for (std::size_t k = 0; k < x.rows.size(); ++k) {
    EXPECT_EQ(x.rows[k].count, y.rows[k].count);
    EXPECT_NEAR(x.rows[k].usd, y.rows[k].usd, 1e-9);
    EXPECT_NEAR(x.rows[k].gas.population_std(), y.rows[k].gas.population_std(), 1e-6);
  }
}

TEST(Usage, MalformedAddressSkipsRecord) {
  UsageAccumulator acc;
  acc.add(rec({"0xzz"}, "ETH", 1, 1), AddressMap::bundled(), PriceTable::defaults(), 4);
  const auto t = acc.table();
  EXPECT_TRUE(t.empty());
  ASSERT_EQ(t.errors.size(), 1u);
  EXPECT_EQ(t.errors[0].line, 4);
}

TEST(WashTrading, ModelAndProperties) {
  // 0.3% DEX fee, free loan, 0.01 USD gas per transaction
  EXPECT_NEAR(wash_trading_cost(481893.0, 0.003, 0.0, 0.01, 1), 1445.689, 1e-9);
  const double a = wash_trading_cost(1e5, 0.003, 0.0009, 2.0, 3);
  const double b = wash_trading_cost(2e5, 0.003, 0.0009, 2.0, 3);
  const double c = wash_trading_cost(3e5, 0.003, 0.0009, 2.0, 3);
  EXPECT_LT(a, b);
  EXPECT_NEAR(c - b, b - a, 1e-9);
  EXPECT_THROW(wash_trading_cost(1, 1.0, 0.0, 0, 1), ConfigError);
  EXPECT_THROW(wash_trading_cost(1, 0.0, -0.1, 0, 1), ConfigError);
}
