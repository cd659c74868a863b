// Copyright 2026 The Neuromorphic Federated Learning Authors
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

#include <gtest/gtest.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "json.hpp"
#include "support/process.h"

namespace {

namespace fs = std::filesystem;
using namespace std::chrono_literals;
using nfl::testing::Child;
using nfl::testing::Lines;
using nfl::testing::ReadText;
using nfl::testing::RunProcess;
using Json = nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("nfl_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    config_ = (dir_ / "small.json").string();
    std::ofstream(config_) << R"({
      "federation": {"clients": 2, "rounds": 2, "timeout_ms": 60000},
      "data": {"test_size": 10}
    })";
  }
  void TearDown() override { fs::remove_all(dir_); }

  nfl::testing::ProcessResult Run(std::vector<std::string> args,
                                  const std::string& tag) {
    args.insert(args.begin(), NFL_CLI_PATH);
    return RunProcess(args, dir_ / ("run_" + tag), 120s);
  }

  fs::path dir_;
  std::string config_;
};

TEST_F(CliTest, GenDataWritesDeterministicFiles) {
  const auto a = (dir_ / "a").string(), b = (dir_ / "b").string();
  auto r = Run({"gen-data", "--out", a}, "a");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["shots"], 25);
  EXPECT_EQ(Json::parse(r.out)["test"], 100);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.path().extension() == ".nfev") ++files;
  }
  EXPECT_EQ(files, 125u);
  r = Run({"gen-data", "--out", b}, "b");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    EXPECT_EQ(ReadText(e.path()), ReadText(fs::path(b) / rel)) << rel;
  }
}

TEST_F(CliTest, GenDataZeroTestSize) {
  std::ofstream(dir_ / "zero.json") << R"({"data": {"test_size": 0}})";
  const auto out = dir_ / "z";
  const auto r = Run({"gen-data", "--config", (dir_ / "zero.json").string(),
                      "--out", out.string()}, "z");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto manifest = Json::parse(ReadText(out / "manifest.json"));
  EXPECT_TRUE(manifest["test"].empty());
  EXPECT_EQ(manifest["clients"].size(), 5u);
}

TEST_F(CliTest, SimulateWritesMetricsAndWeights) {
  const auto out = dir_ / "sim";
  const auto r = Run({"simulate", "--config", config_, "--out", out.string()}, "s");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto lines = Lines(r.out);
  EXPECT_EQ(Lines(ReadText(out / "metrics.jsonl")), lines);
  ASSERT_EQ(lines.size(), 1u + 4 + 2 + 1);
  int clients = 0, globals = 0;
  for (const auto& l : lines) {
    const auto j = Json::parse(l);
    clients += j["type"] == "client";
    globals += j["type"] == "global";
  }
  EXPECT_EQ(clients, 4);
  EXPECT_EQ(globals, 2);
  for (const char* f : {"config.json", "global.nfw", "client_0.nfw", "client_1.nfw"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto ev = Run({"eval", "--config", config_, "--weights",
                       (out / "global.nfw").string()}, "e");
  ASSERT_EQ(ev.exit_code, 0) << ev.err;
  const auto summary = Json::parse(lines.back());
  const auto last_global = Json::parse(lines[lines.size() - 2]);
  EXPECT_EQ(Json::parse(ev.out)["test_accuracy"], last_global["test_accuracy"]);
  EXPECT_EQ(Json::parse(ev.out)["samples"], 10);
  EXPECT_EQ(summary["checksum"], last_global["checksum"]);
}

TEST_F(CliTest, SimulateZeroRounds) {
  const auto r = Run({"simulate", "--config", config_, "--rounds", "0"}, "s0");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto lines = Lines(r.out);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(Json::parse(lines[0])["type"], "initial");
}

TEST_F(CliTest, SimulateFromGeneratedData) {
  const auto data = (dir_ / "data").string();
  ASSERT_EQ(Run({"gen-data", "--config", config_, "--out", data}, "g").exit_code, 0);
  const auto a = Run({"simulate", "--config", config_, "--data", data}, "a");
  const auto b = Run({"simulate", "--config", config_}, "b");
  ASSERT_EQ(a.exit_code, 0) << a.err;
  ASSERT_EQ(b.exit_code, 0) << b.err;
  EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, BadConfigNamesTheField) {
  std::ofstream(dir_ / "bad.json") << R"({"plasticity": {"window": 0}})";
  const auto r = Run({"simulate", "--config", (dir_ / "bad.json").string()}, "bad");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("plasticity.window"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, EvalEmptyTestSet) {
  std::ofstream(dir_ / "zero.json") << R"({"data": {"test_size": 0}})";
  const auto zero = (dir_ / "zero.json").string();
  const auto sim = Run({"simulate", "--config", config_, "--rounds", "0", "--out",
                        (dir_ / "w").string()}, "w");
  ASSERT_EQ(sim.exit_code, 0) << sim.err;
  const auto r = Run({"eval", "--config", zero, "--weights",
                      (dir_ / "w" / "global.nfw").string()}, "e");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("empty test set"), std::string::npos) << r.err;
}

TEST_F(CliTest, ServeAndClientProcessesMatchSimulate) {
  const auto sim = Run({"simulate", "--config", config_}, "sim");
  ASSERT_EQ(sim.exit_code, 0) << sim.err;
  const auto expected = Json::parse(Lines(sim.out).back())["checksum"];

  const auto out = dir_ / "serve";
  fs::create_directories(out);
  Child server({NFL_CLI_PATH, "serve", "--config", config_, "--listen",
                "127.0.0.1:0", "--out", out.string()},
               dir_ / "serve.out", dir_ / "serve.err");
  const auto addr = server.AwaitStderrLine("listening on ", 60s);
  ASSERT_TRUE(addr) << server.Stderr();
  std::vector<std::unique_ptr<Child>> clients;
  for (int k = 0; k < 2; ++k) {
    const auto tag = std::to_string(k);
    clients.push_back(std::make_unique<Child>(
        std::vector<std::string>{NFL_CLI_PATH, "client", "--config", config_,
                                 "--id", tag, "--server", *addr, "--out",
                                 out.string()},
        dir_ / ("client" + tag + ".out"), dir_ / ("client" + tag + ".err")));
  }
  for (auto& c : clients) EXPECT_EQ(c->Wait(120s), 0) << c->Stderr();
  ASSERT_EQ(server.Wait(120s), 0) << server.Stderr();
  const auto lines = Lines(server.Stdout());
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(Json::parse(lines.back())["checksum"], expected);
  // Client-side records match the in-process ones.
  std::vector<std::string> sim_clients, proc_clients;
  for (const auto& l : Lines(sim.out)) {
    if (Json::parse(l)["type"] == "client") sim_clients.push_back(l);
  }
  for (auto& c : clients) {
    for (const auto& l : Lines(c->Stdout())) proc_clients.push_back(l);
  }
  std::sort(sim_clients.begin(), sim_clients.end());
  std::sort(proc_clients.begin(), proc_clients.end());
  EXPECT_EQ(proc_clients, sim_clients);
}

TEST_F(CliTest, ServerTimesOutWithMissingClient) {
  std::ofstream(dir_ / "short.json") << R"({
    "federation": {"clients": 2, "rounds": 1, "timeout_ms": 1500},
    "data": {"test_size": 0}
  })";
  const auto cfg = (dir_ / "short.json").string();
  Child server({NFL_CLI_PATH, "serve", "--config", cfg, "--listen", "127.0.0.1:0"},
               dir_ / "serve.out", dir_ / "serve.err");
  const auto addr = server.AwaitStderrLine("listening on ", 60s);
  ASSERT_TRUE(addr) << server.Stderr();
  Child client({NFL_CLI_PATH, "client", "--config", cfg, "--id", "0", "--server",
                *addr},
               dir_ / "c.out", dir_ / "c.err");
  EXPECT_EQ(server.Wait(60s), 1);
  EXPECT_NE(server.Stderr().find("timeout"), std::string::npos) << server.Stderr();
  EXPECT_EQ(client.Wait(60s), 1);
  EXPECT_NE(client.Stderr().find("timeout"), std::string::npos) << client.Stderr();
}

TEST_F(CliTest, UnknownSubcommandFails) {
  const auto r = Run({"bogus"}, "x");
  EXPECT_NE(r.exit_code, 0);
}

}  // namespace
