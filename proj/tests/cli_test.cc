/*
 * Copyright 2026 The fedcloud Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "fedcloud/cli.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fedcloud {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fedcloud");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fedcloud_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path Write(const std::string& name, const std::string& body) {
    std::ofstream(dir_ / name) << body;
    return dir_ / name;
  }

  fs::path dir_;
};

TEST_F(CliTest, KeygenWritesTwoFiles) {
  const auto a = Invoke({"keygen", "--bits", "32", "--out", (dir_ / "k1").string(), "--seed", "7"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_TRUE(fs::exists(dir_ / "k1" / "public_key.json"));
  EXPECT_TRUE(fs::exists(dir_ / "k1" / "secret_key.json"));
  EXPECT_NE(a.err.find("not cryptographically strong"), std::string::npos);

  const auto again = Invoke({"keygen", "--bits", "32", "--out", (dir_ / "k1").string(), "--seed", "7"});
  EXPECT_NE(again.code, 0);
  EXPECT_NE(again.err.find("--force"), std::string::npos);

  const auto forced = Invoke({"keygen", "--bits", "32", "--out", (dir_ / "k1").string(), "--seed", "7", "--force"});
  EXPECT_EQ(forced.code, 0);
  EXPECT_EQ(forced.out, a.out);
  const auto other = Invoke({"keygen", "--bits", "32", "--out", (dir_ / "k2").string(), "--seed", "7"});
  EXPECT_EQ(other.out, a.out);
}

TEST_F(CliTest, RunWritesReportAndCsv) {
  const auto sc = Write("fl.json", R"({"mode": "fl", "n_clients": 3, "rounds": 5, "seed": 1,
      "task": {"kind": "logistic_regression", "dim": 3, "samples_per_client": 8}})");
  const auto r1 = Invoke({"run", "--scenario", sc.string(), "--out", (dir_ / "o1").string()});
  ASSERT_EQ(r1.code, 0) << r1.err;
  const std::string csv = Slurp(dir_ / "o1" / "metrics.csv");
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  EXPECT_EQ(lines, 2u + 5u);  // schema comment, header, rows
  const auto report = nlohmann::json::parse(Slurp(dir_ / "o1" / "report.json"));
  EXPECT_EQ(report.at("experiments").size(), 1u);

  const auto r2 = Invoke({"run", "--scenario", sc.string(), "--out", (dir_ / "o2").string()});
  ASSERT_EQ(r2.code, 0);
  EXPECT_EQ(Slurp(dir_ / "o1" / "metrics.csv"), Slurp(dir_ / "o2" / "metrics.csv"));
  EXPECT_EQ(Slurp(dir_ / "o1" / "report.json"), Slurp(dir_ / "o2" / "report.json"));
}

TEST_F(CliTest, RunUnknownModeIsConfigError) {
  const auto sc = Write("bad.json", R"({"mode": "federated", "rounds": 1})");
  const auto r = Invoke({"run", "--scenario", sc.string(), "--out", (dir_ / "o").string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("mode"), std::string::npos);
}

TEST_F(CliTest, RunMissingScenarioFileIsConfigError) {
  const auto r = Invoke({"run", "--scenario", (dir_ / "nope.json").string()});
  EXPECT_EQ(r.code, kExitConfig);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Invoke({}).code, kExitConfig);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kExitConfig);
  EXPECT_EQ(Invoke({"run"}).code, kExitConfig);
  EXPECT_EQ(Invoke({"--help"}).code, kExitOk);
}

TEST_F(CliTest, SeedFromEnvironment) {
  ::setenv("FEDCLOUD_SEED", "7", 1);
  const auto env = Invoke({"keygen", "--bits", "32", "--out", (dir_ / "e").string()});
  ::unsetenv("FEDCLOUD_SEED");
  const auto flag = Invoke({"keygen", "--bits", "32", "--out", (dir_ / "f").string(), "--seed", "7"});
  ASSERT_EQ(env.code, 0);
  EXPECT_EQ(env.out, flag.out);
}

TEST_F(CliTest, BenchEncrypt) {
  const auto r = Invoke({"bench-encrypt", "--dim", "1000", "--blocks", "1,16", "--workers", "1,4"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n_blocks,workers,wall_clock_ms,encrypt_ops");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "1000");
  }
  EXPECT_EQ(rows, 4);
  EXPECT_EQ(Invoke({"bench-encrypt", "--dim", "0"}).code, kExitConfig);
}

TEST_F(CliTest, SyncPlan) {
  const auto trace = Write("t.csv",
                           "timestamp_s,platform_id,latency_ms,bandwidth_MBps,jitter_ms\n"
                           "0,a,20,50,1\n0,b,20,50,1\n");
  const auto two = Write("p2.json", R"([{"platform_id": "a", "sync_latency_s": 2, "bandwidth_MBps": 10},
                                         {"platform_id": "b", "sync_latency_s": 4, "bandwidth_MBps": 10}])");
  const auto one = Write("p1.json", R"({"platforms": [{"platform_id": "a", "sync_latency_s": 2,
                                         "bandwidth_MBps": 10, "payload_MB": 100}]})");
  const auto r2 = Invoke({"sync-plan", "--trace", trace.string(), "--platforms", two.string(), "--json"});
  ASSERT_EQ(r2.code, 0) << r2.err;
  const auto j2 = nlohmann::json::parse(r2.out);
  EXPECT_EQ(j2["sync_weights"][0]["weight"], 0.5);
  EXPECT_EQ(j2["sync_weights"][1]["weight"], 0.5);
  EXPECT_EQ(j2["weighted_sync_delay_s"], 3.0);

  const auto r1 = Invoke({"sync-plan", "--trace", trace.string(), "--platforms", one.string(), "--json"});
  ASSERT_EQ(r1.code, 0) << r1.err;
  const auto j1 = nlohmann::json::parse(r1.out);
  EXPECT_EQ(j1["sync_weights"][0]["weight"], 1.0);
  EXPECT_EQ(j1["total_delay_s"], 12.0);

  const auto text = Invoke({"sync-plan", "--trace", trace.string(), "--platforms", one.string()});
  EXPECT_NE(text.out.find("total_delay_s 12"), std::string::npos);

  const auto bad = Write("bad.csv",
                         "timestamp_s,platform_id,latency_ms,bandwidth_MBps,jitter_ms\n0,a,x,1,1\n");
  const auto rb = Invoke({"sync-plan", "--trace", bad.string(), "--platforms", one.string()});
  EXPECT_EQ(rb.code, kExitConfig);
  EXPECT_NE(rb.err.find("line 2"), std::string::npos);
}

}  // namespace
}  // namespace fedcloud
