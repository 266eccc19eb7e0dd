#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "flashopt/analytics/address_map.hpp"
#include "flashopt/common.hpp"

namespace flashopt::analytics {

struct LoanRecord {
  std::string tx;
  std::vector<std::string> touched;
  std::string asset;
  Scalar amount = 0.0;
  Scalar gas = 0.0;
};

struct RecordError {
  int line = 0;
  std::string tx;
  std::string message;
};

struct RecordBatch {
  std::vector<LoanRecord> records;
  std::vector<RecordError> errors;
};

// One JSON object per line:
//   {"tx": "0x..", "touched": ["0x..", ...], "asset": "ETH", "amount": 1.5, "gas": 210000}
// Bad lines are collected in `errors` and skipped.
RecordBatch read_records(std::istream& in, const std::string& origin = "records");

using PlatformSet = std::vector<std::string>;

// Sorted, deduplicated project names; unmapped addresses give "Unknown".
// ParseError on a malformed address.
PlatformSet classify(const LoanRecord& record, const AddressMap& map);
std::string platform_label(const PlatformSet& set);

class PriceTable {
 public:
  // DAI 1, ETH 350, USDC 1, BAT 0.2, WBTC 10000, ZRX 0.3, MKR 500, LINK 10,
  // USDT 1, REP 15, KNC 1.5, LEND 0.5, sUSD 1.
  static PriceTable defaults();
  // Lines "asset,price".
  static PriceTable parse(std::istream& in, const std::string& origin = "prices");
  static PriceTable load(const std::filesystem::path& path);

  void set(const std::string& asset, Scalar usd);
  std::optional<Scalar> price(const std::string& asset) const;

 private:
  std::map<std::string, Scalar> prices_;
};

// Count, mean and sum of squared deviations; merges are associative (Chan et
// al. pairwise update).
struct GasStats {
  long n = 0;
  Scalar mean = 0.0;
  Scalar m2 = 0.0;

  void add(Scalar x);
  void merge(const GasStats& other);
  Scalar population_std() const;
};

struct UsageRow {
  std::string label;
  long count = 0;
  Scalar usd = 0.0;
  long unpriced = 0;  // records left out of `usd` for lack of a price
  GasStats gas;

  bool flagged() const { return unpriced > 0; }
  void merge(const UsageRow& other);
};

struct UsageTable {
  std::vector<UsageRow> rows;  // by count desc, then label
  UsageRow others;             // sets seen fewer than min_count times, or with Unknown
  UsageRow totals;
  std::vector<RecordError> errors;

  bool empty() const { return totals.count == 0; }
};

class UsageAccumulator {
 public:
  // Errors from a malformed address are recorded and the record skipped.
  void add(const LoanRecord& record, const AddressMap& map, const PriceTable& prices,
           int line = 0);
  void merge(const UsageAccumulator& other);
  UsageTable table(long min_count = 5) const;

 private:
  std::map<PlatformSet, UsageRow> sets_;
  std::vector<RecordError> errors_;
};

UsageTable aggregate(const std::vector<LoanRecord>& records, const AddressMap& map,
                     const PriceTable& prices, long min_count = 5);

// volume * dex_fee + (volume / 2) * loan_fee + n_txns * gas_cost, all USD.
Scalar wash_trading_cost(Scalar target_volume_usd, Scalar dex_fee, Scalar loan_fee,
                         Scalar gas_cost_per_txn, long n_txns);

void write_usage_text(std::ostream& out, const UsageTable& table);
void write_usage_csv(std::ostream& out, const UsageTable& table);

}  // namespace flashopt::analytics
