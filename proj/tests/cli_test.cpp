// Copyright 2026 The anonpoll Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "anonpoll/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <unistd.h>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "anonpoll/estimate.hpp"
#include "anonpoll/io.hpp"

namespace anonpoll {
namespace {

using nlohmann::json;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> CsvRows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream fields(line);
    std::string f;
    while (std::getline(fields, f, ',')) row.push_back(f);
    if (!line.empty() && line.back() == ',') row.push_back("");
    rows.push_back(row);
  }
  return rows;
}

// Maps "quantity/method" to the value column of a tables CSV.
std::map<std::string, double> TableValues(const std::string& csv) {
  std::map<std::string, double> m;
  const auto rows = CsvRows(csv);
  EXPECT_EQ(rows.at(0), (std::vector<std::string>{"table", "quantity", "method", "value"}));
  for (size_t r = 1; r < rows.size(); ++r) {
    m[rows[r][1] + "/" + rows[r][2]] = std::stod(rows[r][3]);
  }
  return m;
}

double Round2(double x) { return std::round(x * 100.0) / 100.0; }

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("anonpoll_cli_" + std::to_string(::getpid()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string File(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

TEST(CliTest, TablesEntropySweden) {
  const CliRun r = Cli({"tables", "--scenario", "sweden2014", "--metric", "entropy"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto v = TableValues(r.out);
  EXPECT_EQ(Round2(v["H[T]/"]), 2.80);
  EXPECT_EQ(Round2(v["I[T;R]/pair"]), 2.06);
  EXPECT_EQ(Round2(v["H[T|R]/pair"]), 0.74);
  EXPECT_EQ(Round2(v["worst_retained(SD)/pair"]), 0.11);
  EXPECT_EQ(Round2(v["I[T;R]/list"]), 0.93);
  EXPECT_EQ(Round2(v["H[T|R]/list"]), 1.87);
  EXPECT_EQ(Round2(v["worst_retained(SD)/list"]), 1.07);
}

TEST(CliTest, TablesAllUniform) {
  const CliRun r = Cli({"tables", "--scenario", "uniform10"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto v = TableValues(r.out);
  EXPECT_NEAR(v["Var(1)/pair"], 0.2025, 1e-12);
  EXPECT_NEAR(v["Cov(1;2)/list"], -0.09, 1e-12);
  EXPECT_NEAR(v["Var(1)/baseline"], 0.09, 1e-12);
  EXPECT_EQ(v["n_method(1)/list"], 11250);
  EXPECT_EQ(v["n_method(1)/pair"], 9000);
  EXPECT_EQ(v["mean_J(1)/list"], 1.125);
}

TEST(CliTest, PrivacyUniformListShowsMeanJeopardy) {
  const CliRun r = Cli({"privacy", "--scenario", "uniform10", "--method", "list",
                     "--sensitive", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  bool found = false;
  std::istringstream in(r.out);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find("mean_J(1)") != std::string::npos) {
      found = true;
      EXPECT_NE(line.find("1.13"), std::string::npos) << line;
    }
    EXPECT_EQ(line.find("pair"), std::string::npos) << line;
  }
  EXPECT_TRUE(found) << r.out;
}

TEST(CliTest, PrivacyJsonByLabel) {
  const CliRun r = Cli({"privacy", "--scenario", "sweden2014", "--sensitive", "SD",
                     "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  const JeopardyReport pair = JeopardyFromJson(j["pair"]["jeopardy"]);
  EXPECT_NEAR(pair.max_j, 87.1, 0.05);
  EXPECT_EQ(j["list"]["privacy"]["designated_party"], 1);
}

TEST(CliTest, MalformedCountsIsFileFormatError) {
  TempDir dir;
  const std::string path = dir.File("bad.csv");
  std::ofstream(path) << "block_label,k_index,count\npairs,1,3\npairs,2,oops\n";
  const CliRun r = Cli({"estimate", "--design", "pair", "--counts", path});
  EXPECT_EQ(r.code, 2);
  const json e = json::parse(r.err);
  EXPECT_EQ(e["error"], "FileFormatError");
  EXPECT_EQ(e["line"], 3);
  EXPECT_EQ(e["column"], 9);
}

TEST(CliTest, SimulateThenEstimate) {
  TempDir dir;
  const std::string counts = dir.File("c.csv");
  CliRun r = Cli({"simulate", "--scenario", "sweden2014", "--design", "balanced", "--n",
               "20000", "--seed", "5", "--out", counts});
  ASSERT_EQ(r.code, 0) << r.err;
  r = Cli({"estimate", "--scenario", "sweden2014", "--design", "balanced", "--counts",
           counts, "--level", "0.9"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  const EstimateResult e = EstimateFromJson(j);
  EXPECT_EQ(e.n, 20000);
  EXPECT_EQ(e.method, MethodTag::kList);
  EXPECT_NEAR(e.p_hat.sum(), 1.0, 1e-9);
  EXPECT_NEAR(e.p_hat[1], 0.31, 0.03);
  EXPECT_EQ(j["intervals"].size(), 10u);
  EXPECT_EQ(j["labels"][0], "SD");
}

TEST(CliTest, SimulatePairEstimateFromDesignFile) {
  TempDir dir;
  const std::string design = dir.File("d.json");
  std::ofstream(design) << R"({"n_parties":4,"lists":[[1,2],[1,3],[1,4]],"weights":[0.25,0.25,0.5]})";
  const std::string counts = dir.File("c.csv");
  CliRun r = Cli({"simulate", "--n-parties", "4", "--design", design, "--n", "900", "--seed",
               "2", "--out", counts});
  ASSERT_EQ(r.code, 0) << r.err;
  r = Cli({"estimate", "--n-parties", "4", "--design", design, "--counts", counts});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["n"], 900);
  r = Cli({"estimate", "--n-parties", "4", "--design", "pair", "--counts", counts});
  EXPECT_EQ(r.code, 2);
}

TEST(CliTest, SeedFallsBackToEnvironment) {
  const CliRun a = Cli({"simulate", "--design", "pair", "--n", "300", "--seed", "77"});
  ::setenv("ANONPOLL_SEED", "77", 1);
  const CliRun b = Cli({"simulate", "--design", "pair", "--n", "300"});
  ::setenv("ANONPOLL_SEED", "bad", 1);
  const CliRun c = Cli({"simulate", "--design", "pair", "--n", "300"});
  ::unsetenv("ANONPOLL_SEED");
  const CliRun d = Cli({"simulate", "--design", "pair", "--n", "300"});
  const CliRun e = Cli({"simulate", "--design", "pair", "--n", "300", "--seed", "1"});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(c.code, 2);
  EXPECT_EQ(d.out, e.out);
  EXPECT_NE(a.out, d.out);
  EXPECT_EQ(CountsFromCsv(a.out).Total(), 300);
}

TEST(CliTest, SimulateStudyJson) {
  const CliRun r = Cli({"simulate", "--design", "pair", "--n", "500", "--replications", "200",
                     "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["replications"], 200);
}

TEST(CliTest, PowerCsv) {
  const CliRun r = Cli({"power", "--scenario", "sweden2014", "--party", "SD", "--bmax", "0.04",
                     "--bstep", "0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = CsvRows(r.out);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"b", "power_pair", "power_list"}));
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_NEAR(std::stod(rows[1][1]), 0.05, 1e-9);
  EXPECT_GT(std::stod(rows[3][1]), 0.85);
  EXPECT_GT(std::stod(rows[3][1]), std::stod(rows[3][2]));
  const CliRun fixed = Cli({"power", "--alloc", "13500", "--bmax", "0.01", "--bstep", "0.01"});
  EXPECT_EQ(fixed.code, 0) << fixed.err;
  EXPECT_EQ(Cli({"power", "--alloc", "15000"}).code, 2);
}

TEST(CliTest, SdCurveCsv) {
  const CliRun r = Cli({"sdcurve", "--nmin", "8100", "--nmax", "8100", "--nstep", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = CsvRows(r.out);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"n", "sd_method", "sd_pair", "sd_binomial"}));
  EXPECT_NEAR(std::stod(rows[1][1]), 0.01, 1e-12);
}

TEST(CliTest, DesignJson) {
  const CliRun r = Cli({"design", "--design", "balanced", "--n-parties", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["rank"], 4);
  EXPECT_EQ(j["stacked"].size(), 6u);
  EXPECT_EQ(j["response_labels"][1], "L1-");
  EXPECT_EQ(j["design"]["lists"][0], (json{1, 2}));
}

TEST(CliTest, UsageErrors) {
  EXPECT_EQ(Cli({}).code, 2);
  EXPECT_EQ(Cli({"bogus"}).code, 2);
  EXPECT_EQ(Cli({"tables", "--metric", "nonsense"}).code, 2);
  EXPECT_EQ(Cli({"privacy", "--sensitive", "XX"}).code, 2);
  EXPECT_EQ(Cli({"design", "--design", "balanced", "--n-parties", "5"}).code, 2);
  const CliRun r = Cli({"simulate", "--n", "ten"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.err)["error"], "UsageError");
  EXPECT_EQ(Cli({"--help"}).code, 0);
}

}  // namespace
}  // namespace anonpoll
