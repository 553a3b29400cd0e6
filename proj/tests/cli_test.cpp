/*
 * Copyright 2026 The ejlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

/// Runs the CLI through the shell, capturing stdout (stderr is discarded).
Run run(const std::string& args) {
  const std::string cmd = std::string(EJLAB_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("ejlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, TopoPrintsOrderDiameterAndDistribution) {
  const auto r = run("topo --a 3 --b 4");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "n=37 diameter=3\n1,6,12,18\n");
  EXPECT_EQ(run("topo --a 3 --b 4 --out-dir " + dir_.string()).code, 0);
  EXPECT_EQ(slurp(dir_ / "topology.txt").rfind("ej-topology v1 a=3 b=4 n=37\n0 0 0 ", 0), 0u);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("topo --a").code, 2);
  EXPECT_EQ(run("route --src 1").code, 2);
}

TEST_F(CliTest, RandomisedCommandsNeedASeed) {
  for (const char* cmd : {"faults --count 3", "eval --engine dijkstra", "throughput --engine dijkstra", "train", "repro"}) {
    EXPECT_EQ(run(cmd).code, 2) << cmd;
  }
  const auto cfg = write("seeded.json", R"({"seed": 3})");
  EXPECT_EQ(run("faults --count 3 --config " + cfg.string()).code, 0);
}

TEST_F(CliTest, UnknownConfigKeyIsRejected) {
  const auto cfg = write("bad.json", R"({"seed": 1, "traffic": {"cycle": 5}})");
  const std::string cmd = std::string(EJLAB_CLI_PATH) + " eval --config " + cfg.string() + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::array<char, 512> buf{};
  std::string out;
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  EXPECT_EQ(WEXITSTATUS(pclose(pipe)), 2);
  EXPECT_NE(out.find("traffic.cycle"), std::string::npos);
}

TEST_F(CliTest, RuntimeErrorsExitOne) {
  EXPECT_EQ(run("faults --a 3 --b 4 --count 40 --seed 1").code, 1);
  EXPECT_EQ(run("route --a 3 --b 4 --src 0 --dst 5 --faults /nonexistent/f.txt").code, 1);
}

TEST_F(CliTest, FaultsAndRouteFormats) {
  const auto f = run("faults --a 5 --b 6 --model clustered --count 4 --seed 11");
  ASSERT_EQ(f.code, 0);
  EXPECT_EQ(f.out.rfind("ej-faults v1 model=clustered count=4 seed=11\n", 0), 0u);
  const auto file = write("f.txt", f.out);
  const auto r = run("route --a 5 --b 6 --engine dijkstra --src 0 --dst 90 --faults " + file.string());
  ASSERT_EQ(r.code, 0);
  std::istringstream line(r.out);
  int src = -1, dst = -1, hops = -1;
  std::string engine, status;
  line >> src >> dst >> engine >> status >> hops;
  EXPECT_EQ(src, 0);
  EXPECT_EQ(dst, 90);
  EXPECT_EQ(engine, "dijkstra");
  EXPECT_EQ(status, "delivered");
  int node = -1, count = 0;
  while (line >> node) ++count;
  EXPECT_EQ(count, hops + 1);
  EXPECT_EQ(node, 90);

  const auto all = run("route --a 2 --b 3 --engine greedy --all");
  EXPECT_EQ(std::count(all.out.begin(), all.out.end(), '\n'), 19 * 18);
}

TEST_F(CliTest, EvalThroughputAndPlot) {
  const std::string out = " --out-dir " + dir_.string();
  ASSERT_EQ(run("eval --seed 1 --engine dijkstra --faults 0 --trials 2 --pairs 20" + out).code, 0);
  const auto csv = slurp(dir_ / "reachability.csv");
  EXPECT_EQ(csv.rfind("# manifest=", 0), 0u);
  EXPECT_NE(csv.find("\ndijkstra,3,4,uniform,0,0,20,1,1,"), std::string::npos);
  ASSERT_EQ(run("plot --input " + (dir_ / "reachability.csv").string() + out).code, 0);
  for (const char* svg : {"pdr.svg", "err.svg", "avg_distance.svg"}) {
    const auto text = slurp(dir_ / svg);
    EXPECT_NE(text.find("<metadata>manifest="), std::string::npos) << svg;
  }
  ASSERT_EQ(run("throughput --seed 1 --engine greedy,dijkstra --loads 0.02,0.04 --cycles 200 --seeds 2" + out).code, 0);
  const auto tput = slurp(dir_ / "throughput.csv");
  EXPECT_NE(tput.find("\ngreedy,3,4,clustered,5,0.02,0,"), std::string::npos);
  EXPECT_NE(tput.find("\ndijkstra,3,4,clustered,5,0.04,1,"), std::string::npos);
}

TEST_F(CliTest, TrainWritesPolicyAndLog) {
  const auto cfg = write("t.json", R"({"seed": 2, "training": {"curriculum": [0, 1], "bc_pairs": 500, "bc_epochs": 2,
                                       "rollout_batch": 256, "family": [[3, 4]]}})");
  ASSERT_EQ(run("train --episodes-per-density 50 --config " + cfg.string() + " --out-dir " + dir_.string()).code, 0);
  EXPECT_EQ(slurp(dir_ / "policy.bin").substr(0, 6), "EJPPO1");
  const auto log = slurp(dir_ / "training_log.csv");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 2 + 100);
  ASSERT_EQ(run("route --a 5 --b 6 --engine rl --src 0 --dst 7 --policy " + (dir_ / "policy.bin").string()).code, 0);
}
