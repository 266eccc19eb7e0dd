#include "flashopt/analytics/usage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

namespace flashopt::analytics {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

LoanRecord record_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("expected a JSON object");
  LoanRecord r;
  r.tx = j.value("tx", std::string());
  if (!j.contains("touched") || !j["touched"].is_array()) {
    throw ParseError("'touched' must be an array of addresses");
  }
  for (const auto& a : j["touched"]) {
    if (!a.is_string()) throw ParseError("'touched' must hold strings");
    r.touched.push_back(a.get<std::string>());
  }
  if (!j.contains("asset") || !j["asset"].is_string()) throw ParseError("missing 'asset'");
  r.asset = j["asset"].get<std::string>();
  if (!j.contains("amount") || !j["amount"].is_number()) throw ParseError("missing 'amount'");
  r.amount = j["amount"].get<Scalar>();
  r.gas = j.contains("gas") ? j["gas"].get<Scalar>() : 0.0;
  if (!(r.amount >= 0.0) || !std::isfinite(r.amount)) throw ParseError("amount must be >= 0");
  if (!(r.gas >= 0.0) || !std::isfinite(r.gas)) throw ParseError("gas must be >= 0");
  return r;
}

}  // namespace

RecordBatch read_records(std::istream& in, const std::string& origin) {
  RecordBatch batch;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::string tx;
    try {
      const json j = json::parse(t);
      if (j.is_object()) tx = j.value("tx", std::string());
      batch.records.push_back(record_from_json(j));
    } catch (const std::exception& e) {
      batch.errors.push_back({lineno, tx, origin + ":" + std::to_string(lineno) + ": " + e.what()});
    }
  }
  return batch;
}

PlatformSet classify(const LoanRecord& record, const AddressMap& map) {
  std::set<std::string> names;
  for (const auto& address : record.touched) {
    const auto project = map.lookup(address);
    names.insert(project ? *project : "Unknown");
  }
  return {names.begin(), names.end()};
}

std::string platform_label(const PlatformSet& set) {
  if (set.empty()) return "(none)";
  std::string out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (i) out += " + ";
    out += set[i];
  }
  return out;
}

PriceTable PriceTable::defaults() {
  PriceTable t;
  const std::pair<const char*, Scalar> fig[] = {
      {"DAI", 1.0},   {"ETH", 350.0}, {"USDC", 1.0}, {"BAT", 0.2},  {"WBTC", 10000.0},
      {"ZRX", 0.3},   {"MKR", 500.0}, {"LINK", 10.0}, {"USDT", 1.0}, {"REP", 15.0},
      {"KNC", 1.5},   {"LEND", 0.5},  {"sUSD", 1.0},
  };
  for (const auto& [asset, usd] : fig) t.set(asset, usd);
  return t;
}

PriceTable PriceTable::parse(std::istream& in, const std::string& origin) {
  PriceTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw ParseError(where + ": expected 'asset,price'");
    Scalar usd = 0.0;
    try {
      std::size_t used = 0;
      const std::string num = trim(s.substr(comma + 1));
      usd = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument("price");
    } catch (const std::exception&) {
      throw ParseError(where + ": malformed price");
    }
    try {
      t.set(trim(s.substr(0, comma)), usd);
    } catch (const ConfigError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return t;
}

PriceTable PriceTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return parse(in, path.string());
}

void PriceTable::set(const std::string& asset, Scalar usd) {
  if (asset.empty()) throw ConfigError("empty asset id");
  if (!(usd > 0.0) || !std::isfinite(usd)) throw ConfigError("price of " + asset + " must be > 0");
  prices_[asset] = usd;
}

std::optional<Scalar> PriceTable::price(const std::string& asset) const {
  const auto it = prices_.find(asset);
  if (it == prices_.end()) return std::nullopt;
  return it->second;
}

void GasStats::add(Scalar x) {
  ++n;
  const Scalar delta = x - mean;
  mean += delta / static_cast<Scalar>(n);
  m2 += delta * (x - mean);
}

void GasStats::merge(const GasStats& other) {
  if (other.n == 0) return;
  if (n == 0) {
    *this = other;
    return;
  }
  const Scalar na = static_cast<Scalar>(n), nb = static_cast<Scalar>(other.n);
  const Scalar delta = other.mean - mean;
  const Scalar total = na + nb;
  mean += delta * nb / total;
  m2 += other.m2 + delta * delta * na * nb / total;
  n += other.n;
}

Scalar GasStats::population_std() const {
  return n > 0 ? std::sqrt(std::max(0.0, m2 / static_cast<Scalar>(n))) : 0.0;
}

void UsageRow::merge(const UsageRow& other) {
  count += other.count;
  usd += other.usd;
  unpriced += other.unpriced;
  gas.merge(other.gas);
}

void UsageAccumulator::add(const LoanRecord& record, const AddressMap& map,
                           const PriceTable& prices, int line) {
  PlatformSet set;
  try {
    set = classify(record, map);
  } catch (const ParseError& e) {
    errors_.push_back({line, record.tx, e.what()});
    return;
  }
  UsageRow& row = sets_[set];
  if (row.label.empty()) row.label = platform_label(set);
  ++row.count;
  if (const auto p = prices.price(record.asset)) {
    row.usd += record.amount * *p;
  } else {
    ++row.unpriced;
  }
  row.gas.add(record.gas);
}

void UsageAccumulator::merge(const UsageAccumulator& other) {
  for (const auto& [set, row] : other.sets_) {
    UsageRow& mine = sets_[set];
    if (mine.label.empty()) mine.label = row.label;
    mine.merge(row);
  }
  errors_.insert(errors_.end(), other.errors_.begin(), other.errors_.end());
}

UsageTable UsageAccumulator::table(long min_count) const {
  UsageTable t;
  t.others.label = "Others";
  t.totals.label = "Totals";
  t.errors = errors_;
  for (const auto& [set, row] : sets_) {
    const bool unknown = std::find(set.begin(), set.end(), "Unknown") != set.end();
    if (row.count < min_count || unknown) {
      t.others.merge(row);
    } else {
      t.rows.push_back(row);
    }
  }
  std::sort(t.rows.begin(), t.rows.end(), [](const UsageRow& a, const UsageRow& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.label < b.label;
  });
  for (const auto& row : t.rows) t.totals.merge(row);
  t.totals.merge(t.others);
  return t;
}

UsageTable aggregate(const std::vector<LoanRecord>& records, const AddressMap& map,
                     const PriceTable& prices, long min_count) {
  UsageAccumulator acc;
  int line = 0;
  for (const auto& r : records) acc.add(r, map, prices, ++line);
  return acc.table(min_count);
}

Scalar wash_trading_cost(Scalar target_volume_usd, Scalar dex_fee, Scalar loan_fee,
                         Scalar gas_cost_per_txn, long n_txns) {
  if (!(dex_fee >= 0.0 && dex_fee < 1.0) || !(loan_fee >= 0.0 && loan_fee < 1.0)) {
    throw ConfigError("fees must lie in [0, 1)");
  }
  return target_volume_usd * dex_fee + 0.5 * target_volume_usd * loan_fee +
         static_cast<Scalar>(n_txns) * gas_cost_per_txn;
}

namespace {

std::vector<const UsageRow*> printable(const UsageTable& t) {
  std::vector<const UsageRow*> rows;
  if (t.empty()) return rows;
  for (const auto& r : t.rows) rows.push_back(&r);
  if (t.others.count > 0) rows.push_back(&t.others);
  rows.push_back(&t.totals);
  return rows;
}

}  // namespace

void write_usage_text(std::ostream& out, const UsageTable& table) {
  const auto rows = printable(table);
  std::size_t width = 9;
  for (const auto* r : rows) width = std::max(width, r->label.size());
  std::ostringstream s;
  s << std::left << std::setw(static_cast<int>(width)) << "Platforms" << "  " << std::right
    << std::setw(12) << "Transactions" << "  " << std::setw(16) << "Amount (USD)" << "  "
    << std::setw(24) << "Mean gas" << '\n';
  s << std::fixed;
  for (const auto* r : rows) {
    std::ostringstream gas;
    gas << std::fixed << std::setprecision(0) << r->gas.mean << " +/- " << r->gas.population_std();
    std::ostringstream usd;
    usd << std::fixed << std::setprecision(2) << r->usd << (r->flagged() ? "*" : "");
    s << std::left << std::setw(static_cast<int>(width)) << r->label << "  " << std::right
      << std::setw(12) << r->count << "  " << std::setw(16) << usd.str() << "  "
      << std::setw(24) << gas.str() << '\n';
  }
  if (table.totals.unpriced > 0) {
    s << "* " << table.totals.unpriced << " record(s) without a price left out of the USD sum\n";
  }
  for (const auto& e : table.errors) s << "skipped: " << e.message << '\n';
  out << s.str();
}

void write_usage_csv(std::ostream& out, const UsageTable& table) {
  std::ostringstream s;
  s << "platforms,transactions,amount_usd,unpriced,gas_mean,gas_std\n";
  s << std::setprecision(10);
  for (const auto* r : printable(table)) {
    s << '"' << r->label << '"' << ',' << r->count << ',' << r->usd << ',' << r->unpriced << ','
      << r->gas.mean << ',' << r->gas.population_std() << '\n';
  }
  out << s.str();
}

}  // namespace flashopt::analytics
