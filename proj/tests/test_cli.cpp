#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "flashopt/cli/commands.hpp"
#include "flashopt/models/scenario_io.hpp"

using namespace flashopt;
using nlohmann::json;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args, const std::string& stdin_text = "") {
  std::ostringstream out, err;
  std::istringstream in(stdin_text);
  Outcome r;
  r.code = cli::run(args, out, err, in);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string sample_records() {
  return models::read_text_file(models::data_dir() / "records" / "sample.jsonl");
}

// Numbers compare to 1e-9 relative; everything else exactly.
void expect_same(const json& want, const json& got, const std::string& path) {
  if (want.is_number() && got.is_number()) {
    const double a = want.get<double>(), b = got.get<double>();
    EXPECT_LE(std::abs(a - b), 1e-9 * std::max(1.0, std::abs(a))) << path;
    return;
  }
  ASSERT_EQ(want.type(), got.type()) << path;
  if (want.is_object()) {
    ASSERT_EQ(want.size(), got.size()) << path;
    for (auto it = want.begin(); it != want.end(); ++it) {
      ASSERT_TRUE(got.contains(it.key())) << path << "." << it.key();
      expect_same(it.value(), got[it.key()], path + "." + it.key());
    }
  } else if (want.is_array()) {
    ASSERT_EQ(want.size(), got.size()) << path;
    for (std::size_t k = 0; k < want.size(); ++k) {
      expect_same(want[k], got[k], path + "[" + std::to_string(k) + "]");
    }
  } else {
    EXPECT_EQ(want, got) << path;
  }
}

void check_golden(const std::string& name, const std::vector<std::string>& args,
                  const std::string& stdin_text = "") {
  const Outcome r = run(args, stdin_text);
  ASSERT_TRUE(r.err.empty()) << r.err;
  const json got = cli::without_timing(json::parse(r.out));
  const std::string path = std::string(FLASHOPT_GOLDEN_DIR) + "/" + name + ".json";
  if (std::getenv("FLASHOPT_UPDATE_GOLDEN")) {
    std::ofstream(path) << got.dump(2) << '\n';
    GTEST_SKIP() << "rewrote " << path;
  }
  std::ifstream in(path);
  ASSERT_TRUE(in) << "missing golden " << path;
  expect_same(json::parse(in), got, name);
}

}  // namespace

TEST(Golden, OptimizePaa) {
  check_golden("optimize_paa", {"optimize", "--scenario", "paa", "--vector", "paa", "--format", "structured"});
}

TEST(Golden, OptimizePaaCapped) {
  check_golden("optimize_paa_p2_1344", {"optimize", "--scenario", "paa", "--vector", "paa",
                                        "--upper", "p2=1344", "--format", "structured"});
}

TEST(Golden, OptimizeOracleWithoutDebtCap) {
  check_golden("optimize_oracle_no_zy", {"optimize", "--scenario", "oracle", "--vector", "oracle",
                                         "--ignore-constraint", "zY", "--format", "structured"});
}

TEST(Golden, OptimizeOracle) {
  check_golden("optimize_oracle", {"optimize", "--scenario", "oracle", "--vector", "oracle",
                                   "--format", "structured"});
}

TEST(Golden, EvaluatePaaOriginal) {
  check_golden("evaluate_paa", {"evaluate", "--scenario", "paa", "--vector", "paa", "--params",
                                "5500,1300", "--format", "structured"});
}

TEST(Golden, EvaluateOracleInfeasible) {
  check_golden("evaluate_oracle", {"evaluate", "--scenario", "oracle", "--vector", "oracle",
                                   "--params", "898.58,546.80,3517.86", "--format", "structured"});
}

TEST(Golden, Describe) {
  check_golden("describe_oracle", {"describe", "--scenario", "oracle", "--vector", "oracle",
                                   "--format", "structured"});
}

TEST(Golden, Atomicity) {
  check_golden("atomicity", {"atomicity", "--market", "dai_eth", "--i", "0,5,50", "--trials", "30",
                             "--bootstrap", "500", "--seed", "4", "--format", "structured"});
}

TEST(Golden, Classify) {
  check_golden("classify", {"classify", "--format", "structured"}, sample_records());
}

TEST(Cli, ExitCodes) {
  const Outcome missing = run({"optimize", "--scenario", "nope.json", "--vector", "paa"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_TRUE(missing.out.empty());
  EXPECT_FALSE(missing.err.empty());

  EXPECT_EQ(run({"evaluate", "--scenario", "paa", "--vector", "paa", "--params", "1"}).code, 2);
  EXPECT_EQ(run({"evaluate", "--scenario", "paa", "--vector", "nope", "--params", "1,2"}).code, 2);
  EXPECT_EQ(run({"--format", "xml", "describe", "--scenario", "paa", "--vector", "paa"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"optimize", "--scenario", "paa", "--vector", "paa", "--starts", "0"}).code, 2);
  EXPECT_EQ(run({"optimize", "--scenario", "paa", "--vector", "paa", "--upper", "p2"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);

  const Outcome infeasible = run({"evaluate", "--scenario", "oracle", "--vector", "oracle", "--params",
                              "898.58,546.80,3517.86"});
  EXPECT_EQ(infeasible.code, 1);
  EXPECT_NE(infeasible.out.find("!! debt_cap"), std::string::npos);
  EXPECT_NE(infeasible.out.find("NEGATIVE"), std::string::npos);

  const Outcome strict = run({"--strict", "evaluate", "--scenario", "oracle", "--vector", "oracle",
                          "--params", "898.58,546.80,3517.86"});
  EXPECT_EQ(strict.code, 1);
  EXPECT_NE(strict.out.find("step 5"), std::string::npos);

  EXPECT_EQ(run({"evaluate", "--scenario", "paa", "--vector", "paa", "--params", "0,0"}).code, 0);
}

TEST(Cli, MalformedRecordInputIsReportedNotFatal) {
  const Outcome r = run({"classify"}, "{\"tx\": 1}\n" + sample_records());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("skipped: stdin:1"), std::string::npos);
}

TEST(Cli, MalformedMapIsAnInputError) {
  const auto path = std::filesystem::temp_directory_path() / "flashopt_bad_map.csv";
  std::ofstream(path) << "0x12,Foo\n";
  const Outcome r = run({"classify", "--map", path.string()}, sample_records());
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(r.out.empty());
  std::filesystem::remove(path);
}

TEST(Cli, SameSeedSameBytes) {
  const std::vector<std::string> args{"atomicity", "--market", "dai_eth", "--trials", "20",
                                      "--i", "0,10", "--format", "structured"};
  const auto a = cli::without_timing(json::parse(run(args).out));
  const auto b = cli::without_timing(json::parse(run(args).out));
  EXPECT_EQ(a.dump(), b.dump());
  auto other = args;
  other.insert(other.begin(), {"--seed", "2"});
  EXPECT_NE(cli::without_timing(json::parse(run(other).out))["results"].dump(), a["results"].dump());
}

TEST(Cli, ReportCarriesHashesAndVersions) {
  const auto j = json::parse(
      run({"describe", "--scenario", "paa", "--vector", "paa", "--format", "structured"}).out);
  EXPECT_EQ(j["config_hash"].get<std::string>().size(), 16u);
  EXPECT_EQ(j["scenario_hash"].get<std::string>().size(), 16u);
  EXPECT_TRUE(j["versions"].contains("eigen"));
  EXPECT_EQ(j["command"], "describe --scenario paa --vector paa --format structured");
}

TEST(Cli, OptimizeFlagsDebtCapInconsistency) {
  const auto j = json::parse(run({"optimize", "--scenario", "oracle", "--vector", "oracle",
                                  "--format", "structured"}).out);
  bool flagged = false;
  for (const auto& n : j["notes"]) {
    flagged = flagged || n.get<std::string>().find("violates debt_cap (zY)") != std::string::npos;
  }
  EXPECT_TRUE(flagged);
}

TEST(Cli, CsvFormats) {
  const Outcome o = run({"optimize", "--scenario", "paa", "--vector", "paa", "--format", "csv"});
  EXPECT_EQ(o.out.rfind("section,name,value\n", 0), 0u);
  const Outcome c = run({"classify", "--format", "csv"}, sample_records());
  EXPECT_EQ(c.out.rfind("platforms,transactions,amount_usd", 0), 0u);
}
