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

// Acceptance run: seven criteria, one PASS/FAIL line each.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "nfl/error.h"
#include "nfl/experiment/config.h"
#include "nfl/experiment/experiment.h"
#include "nfl/fed/model.h"
#include "nfl/fed/protocol.h"
#include "nfl/fed/server.h"
#include "nfl/fed/transport.h"
#include "nfl/plasticity/soel.h"
#include "nfl/plasticity/sop.h"
#include "nfl/quant.h"
#include "support/oracles.h"
#include "support/process.h"
#include "support/soel_instances.h"

namespace {

namespace fs = std::filesystem;
using namespace std::chrono_literals;
using nfl::Error;
using nfl::ErrorCode;
using Json = nlohmann::json;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void Check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("FAILED: " + what);
    }
  }
  void Note(const std::string& what) { notes.push_back(what); }
};

std::string Fmt(const char* format, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), format, a);
  return buf;
}

fs::path Scratch() {
  static const fs::path dir =
      fs::temp_directory_path() / ("nfl_acceptance_" + std::to_string(::getpid()));
  return dir;
}

// ---------------------------------------------------------------- AC1
Outcome Quantization() {
  using namespace nfl::quant;
  Outcome out;
  const std::vector<double> probes = {
      -127.3, -100.5, -64.75, -33.1, -9.99, -1.2, 0.5,   1.0,  3.25,  5.5,
      7.01,   12.6,   17.9,   33.3,  50.5,  63.01, 80.8, 99.5, 111.1, 125.9};
  int probe_checks = 0, worst_probe = 0;
  double worst_z = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const double v = probes[i];
    for (const auto& spec : {QuantSpec::Weight(), QuantSpec::Trace()}) {
      if (v < spec.min_value() || v > spec.max_value()) continue;
      Rng rng(2024, DeriveStream("acceptance-probe", i * 2 + spec.is_signed));
      constexpr int kN = 100000;
      double sum = 0;
      for (int n = 0; n < kN; ++n) sum += static_cast<double>(StochasticRound(v, spec, rng));
      const auto [lo, hi] = nfl::testing::GridNeighbors(v, spec.step());
      const double p = (v - static_cast<double>(lo)) / static_cast<double>(hi - lo);
      const double sigma = static_cast<double>(hi - lo) * std::sqrt(p * (1 - p) / kN);
      const double err = std::abs(sum / kN - v);
      if (sigma > 0) {
        const double z = err / sigma;
        if (z > worst_z) {
          worst_z = z;
          worst_probe = static_cast<int>(i);
        }
      }
      out.Check(err <= 3 * sigma + 1e-12,
                "probe " + Fmt("%g", v) + " mean off by " + Fmt("%g", err));
      ++probe_checks;
    }
  }
  out.Note(std::to_string(probes.size()) + " probe values, " +
           std::to_string(probe_checks) + " grid checks at n=1e5, worst |z|=" +
           Fmt("%.2f", worst_z) + " at " + Fmt("%g", probes[worst_probe]));

  Rng rng(7, DeriveStream("acceptance-nearest-even"));
  bool even_ok = true;
  for (int n = 0; n < 1000000; ++n) {
    const double v = (rng.NextUniform() - 0.5) * 600.0;
    const auto r = RoundNearestEvenInt(v);
    if (r % 2 != 0 || std::abs(static_cast<double>(r) - v) > 1.0 ||
        r != nfl::testing::OracleNearestEven(v)) {
      even_ok = false;
    }
  }
  out.Check(even_ok, "round_nearest_even_int must be even, within 1, and match the oracle");

  // 1,000 federated rounds of random plasticity updates and aggregations.
  Rng f(11, DeriveStream("acceptance-fuzz"));
  auto below = [&](std::uint64_t n) { return static_cast<int>(f.NextBelow(n)); };
  constexpr std::uint32_t kRows = 24, kCols = 5;
  std::vector<std::int8_t> w0(kRows * kCols);
  for (auto& v : w0) v = static_cast<std::int8_t>(2 * below(128) - 128);
  auto global = nfl::fed::ModelSnapshot::Make(0, kRows, kCols, w0);
  std::int64_t updates = 0, bad_updates = 0, bad_aggregates = 0;
  for (int round = 0; round < 1000; ++round) {
    const auto k = static_cast<std::uint32_t>(1 + below(6));
    std::vector<nfl::fed::ModelDelta> deltas;
    for (std::uint32_t c = 0; c < k; ++c) {
      nfl::plasticity::PlasticityConfig cfg;
      cfg.learning_rate_log2 = -6 + below(9);
      cfg.threshold = below(4);
      std::vector<std::int8_t> w = global.weights;
      for (std::uint32_t i = 0; i < kCols; ++i) {
        const auto unit = nfl::plasticity::EvaluateError(
            cfg.MakeErrorUnit(below(17)), below(17));
        for (std::uint32_t j = 0; j < kRows; ++j) {
          const nfl::plasticity::TraceState tr{below(128), below(128)};
          auto& cell = w[j * kCols + i];
          const auto next = nfl::plasticity::ApplySoelUpdate(
              cell, unit, tr, below(2), cfg, f);
          ++updates;
          if (next % 2 != 0 || next < -128 || next > 126) ++bad_updates;
          cell = static_cast<std::int8_t>(std::clamp<std::int64_t>(next, -128, 126));
        }
      }
      deltas.push_back(nfl::fed::MakeDelta(c, global, w));
    }
    global = nfl::fed::Aggregate(global, deltas, k);
    try {
      global.Validate();
    } catch (const Error&) {
      ++bad_aggregates;
    }
  }
  out.Check(bad_updates == 0, std::to_string(bad_updates) + " plasticity updates left the even grid");
  out.Check(bad_aggregates == 0, std::to_string(bad_aggregates) + " aggregates left the even grid");
  out.Note("fuzz: 1000 rounds, " + std::to_string(updates) + " updates checked");
  return out;
}

// ---------------------------------------------------------------- AC2
Outcome SoelOracle() {
  Outcome out;
  std::int64_t triggered = 0, signs = 0, quiet = 0, violations = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto r = nfl::testing::RunSoelInstance(1000 + seed, seed % 2 == 0);
    triggered += r.triggered_synapses;
    signs += r.sign_checks;
    quiet += r.quiet_synapses;
    violations += static_cast<std::int64_t>(r.violations.size());
    if (!r.violations.empty()) out.Check(false, "instance " + std::to_string(seed) + ": " + r.violations.front());
  }
  out.Check(signs > 0 && quiet > 0, "instances must exercise both sign and quiet checks");
  out.Note("200 instances, " + std::to_string(triggered) + " triggered synapses, " +
           std::to_string(signs) + " sign checks, " + std::to_string(quiet) +
           " quiet synapses, " + std::to_string(violations) + " violations");
  return out;
}

// ---------------------------------------------------------------- AC3
Outcome SumOfProducts() {
  using namespace nfl::plasticity;
  Outcome out;
  PlasticityConfig cfg;
  cfg.learning_rate_log2 = 0;
  cfg.offset = 64;
  std::int64_t mismatches = 0, cases = 0;
  for (int e = 0; e <= 127; ++e) {
    ErrorUnit unit = cfg.MakeErrorUnit(0);
    unit.error_register = e;
    unit.last_error = e - cfg.offset;
    unit.triggered = true;
    const auto program = CompileSoelToSop(cfg, unit);
    for (int x1 = 0; x1 <= 127; ++x1) {
      for (int x2 = 0; x2 <= 127; ++x2) {
        const auto b = SopBindings::FromState({x1, x2}, unit);
        const std::int64_t direct = static_cast<std::int64_t>(e - 64) * (x2 - x1);
        ++cases;
        if (EvaluateSop(program, b) != direct ||
            EvaluateSopScaled(program, b) != static_cast<double>(direct)) {
          ++mismatches;
        }
      }
    }
  }
  out.Check(mismatches == 0, std::to_string(mismatches) + " mismatches");
  out.Note(std::to_string(cases) + " (E, x1, x2) cases, eta=1, C=64");
  return out;
}

// ---------------------------------------------------------------- AC4
Outcome TraceKernel() {
  using namespace nfl::plasticity;
  Outcome out;
  const std::vector<std::pair<int, int>> pairs = {
      {1, 2}, {1, 3}, {2, 4}, {2, 5}, {3, 5}, {3, 6}, {4, 7}, {4, 8}, {5, 9}, {6, 10}};
  constexpr int kImpulse = 100, kSeeds = 50;
  double worst = 0;
  for (const auto& [a1, a2] : pairs) {
    TraceParams p;
    p.alpha1_shift = a1;
    p.alpha2_shift = a2;
    p.impulse1 = kImpulse;
    p.impulse2 = kImpulse;
    for (int s = 0; s < kSeeds; ++s) {
      nfl::quant::Rng rng(static_cast<std::uint64_t>(a1 * 100 + a2), static_cast<std::uint64_t>(s));
      auto t = UpdateTrace({}, p, true, rng);
      for (int step = 1; step <= 64; ++step) {
        t = UpdateTrace(t, p, false, rng);
        const double real = nfl::testing::RealKernel(kImpulse, a1, a2, step);
        const double bound = nfl::testing::KernelRoundingBound(a1, a2, step);
        const double err = std::abs(PreKernel(t) - real);
        worst = std::max(worst, err / bound);
        if (err > bound) {
          out.Check(false, "pair (" + std::to_string(a1) + "," + std::to_string(a2) +
                               ") step " + std::to_string(step) + " error " + Fmt("%g", err) +
                               " > bound " + Fmt("%g", bound));
        }
      }
    }
  }
  out.Note("10 (a1, a2) pairs x 50 seeds x 64 steps, worst error/bound " + Fmt("%.3f", worst));
  return out;
}

// ---------------------------------------------------------------- AC5
std::optional<std::string> g_inprocess_checksum;

Outcome FederatedExperiment() {
  using namespace nfl::experiment;
  Outcome out;
  ExperimentConfig cfg;
  const auto workload = PrepareWorkload(cfg, GenerateDataset(cfg));
  const auto result = RunSimulation(cfg, workload, [](const std::string&) {});
  g_inprocess_checksum = FormatChecksum(result.final_snapshot.checksum);
  const auto k = result.round0_accuracy.size();
  out.Check(k == 5 && result.final_accuracy.size() == 5, "five clients expected");
  out.Check(workload.test.size() == 100, "100 held-out samples expected");
  double gain = 0;
  std::string r0 = "[", fin = "[";
  for (std::size_t c = 0; c < k; ++c) {
    const double a = result.round0_accuracy[c], b = result.final_accuracy[c];
    r0 += Fmt("%.2f", a) + (c + 1 < k ? "," : "]");
    fin += Fmt("%.2f", b) + (c + 1 < k ? "," : "]");
    out.Check(b >= a, "(a) client " + std::to_string(c) + " got worse");
    out.Check(b > 0.2, "(c) client " + std::to_string(c) + " not above chance");
    gain += b - a;
  }
  gain /= static_cast<double>(k);
  out.Check(gain >= 0.05, "(b) mean improvement " + Fmt("%.3f", gain) + " < 0.05");
  out.Note("round-0 " + r0 + " -> final " + fin + ", mean gain " +
           Fmt("%.1f", 100 * gain) + " pp, global " +
           Fmt("%.2f", result.global_accuracy.empty() ? 0.0 : result.global_accuracy.back()) +
           ", checksum " + *g_inprocess_checksum);
  return out;
}

// ---------------------------------------------------------------- AC6
std::optional<std::string> RunServeAndClients(Outcome& out) {
  const auto dir = Scratch() / "transport";
  fs::create_directories(dir);
  nfl::testing::Child server({NFL_CLI_PATH, "serve", "--listen", "127.0.0.1:0",
                              "--out", (dir / "serve").string()},
                             dir / "serve.out", dir / "serve.err");
  const auto addr = server.AwaitStderrLine("listening on ", 60s);
  if (!addr) {
    out.Check(false, "server did not report its address: " + server.Stderr());
    return std::nullopt;
  }
  std::vector<std::unique_ptr<nfl::testing::Child>> clients;
  for (int k = 0; k < 5; ++k) {
    const auto id = std::to_string(k);
    clients.push_back(std::make_unique<nfl::testing::Child>(
        std::vector<std::string>{NFL_CLI_PATH, "client", "--id", id, "--server", *addr},
        dir / ("client" + id + ".out"), dir / ("client" + id + ".err")));
  }
  for (auto& c : clients) {
    const auto code = c->Wait(110s);
    out.Check(code == 0, "client exited with " + (code ? std::to_string(*code) : "timeout") +
                             ": " + c->Stderr());
  }
  const auto code = server.Wait(110s);
  out.Check(code == 0, "server exited abnormally: " + server.Stderr());
  const auto lines = nfl::testing::Lines(server.Stdout());
  if (lines.empty()) return std::nullopt;
  return Json::parse(lines.back())["checksum"].get<std::string>();
}

using Mutation = std::function<std::vector<std::vector<std::uint8_t>>(
    const std::vector<std::uint8_t>& delta_frame)>;

// One rogue client against an in-process server. Returns the server's error.
std::optional<ErrorCode> FuzzInProcess(const Mutation& mutate,
                                       std::optional<ErrorCode>* client_saw) {
  nfl::fed::InProcessHub hub;
  const auto initial = nfl::fed::ModelSnapshot::Make(0, 6, 2, std::vector<std::int8_t>(12, 0));
  nfl::fed::FederationServer server({1, 2, 5000ms, 3}, initial);
  auto ch = hub.Connect();
  std::thread rogue([&] {
    try {
      SendMessage(*ch, nfl::fed::MakeHello(0));
      nfl::fed::ParseHelloAck(nfl::fed::ReceiveMessage(*ch, 5s));
      const auto snap = nfl::fed::ParseSnapshot(nfl::fed::ReceiveMessage(*ch, 5s));
      std::vector<std::int16_t> d(12, 0);
      d[3] = 2;
      const auto frame = nfl::fed::EncodeMessage(nfl::fed::MakeDeltaMessage(
          {0, snap.round + 1, snap.rows, snap.cols, d}));
      for (const auto& f : mutate(frame)) ch->Send(f);
      for (;;) {
        const auto m = nfl::fed::ReceiveMessage(*ch, 5s);
        if (m.type == nfl::fed::MessageType::kAbort) {
          *client_saw = nfl::fed::ParseAbort(m).code();
          break;
        }
      }
    } catch (const Error&) {
    }
  });
  std::optional<ErrorCode> code;
  try {
    server.Run(hub);
  } catch (const Error& e) {
    code = e.code();
  }
  rogue.join();
  return code;
}

struct ProcessFuzz {
  std::optional<int> exit_code;
  std::string stderr_text;
};

// The same attack against a real server process over a socket.
ProcessFuzz FuzzServeProcess(const Mutation& mutate, const std::string& tag) {
  const auto dir = Scratch() / ("fuzz_" + tag);
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json")
      << R"({"federation": {"clients": 1, "rounds": 2, "timeout_ms": 20000},
             "data": {"test_size": 0}})";
  nfl::testing::Child server({NFL_CLI_PATH, "serve", "--config", (dir / "cfg.json").string(),
                              "--listen", "127.0.0.1:0"},
                             dir / "serve.out", dir / "serve.err");
  ProcessFuzz r;
  const auto addr = server.AwaitStderrLine("listening on ", 60s);
  if (!addr) return r;
  try {
    auto ch = nfl::fed::ConnectSocket(nfl::fed::SocketAddress::Parse(*addr), 10s);
    SendMessage(*ch, nfl::fed::MakeHello(0));
    nfl::fed::ParseHelloAck(nfl::fed::ReceiveMessage(*ch, 20s));
    const auto snap = nfl::fed::ParseSnapshot(nfl::fed::ReceiveMessage(*ch, 20s));
    std::vector<std::int16_t> d(snap.weights.size(), 0);
    d[0] = 2;
    const auto frame = nfl::fed::EncodeMessage(
        nfl::fed::MakeDeltaMessage({0, snap.round + 1, snap.rows, snap.cols, d}));
    for (const auto& f : mutate(frame)) ch->Send(f);
    ch->Close();
  } catch (const Error&) {
  }
  r.exit_code = server.Wait(30s);
  r.stderr_text = server.Stderr();
  return r;
}

Outcome Transport() {
  Outcome out;
  const auto socket_checksum = RunServeAndClients(out);
  out.Check(g_inprocess_checksum.has_value(), "no in-process reference checksum");
  out.Check(socket_checksum.has_value() && socket_checksum == g_inprocess_checksum,
            "socket checksum " + socket_checksum.value_or("none") + " != in-process " +
                g_inprocess_checksum.value_or("none"));
  out.Note("1 server + 5 client processes: " + socket_checksum.value_or("none") +
           ", in-process: " + g_inprocess_checksum.value_or("none"));

  nfl::quant::Rng rng(99, nfl::quant::DeriveStream("acceptance-protocol-fuzz"));
  struct Kind {
    std::string name;
    ErrorCode expected;
    std::function<Mutation()> make;
  };
  const std::vector<Kind> kinds = {
      {"truncation", ErrorCode::kUnexpectedEnd,
       [&] {
         const auto r = rng.NextU64();
         return Mutation([r](const std::vector<std::uint8_t>& f) {
           const auto cut = 1 + r % (f.size() - 1);
           return std::vector<std::vector<std::uint8_t>>{{f.begin(), f.begin() + static_cast<long>(cut)}};
         });
       }},
      {"checksum corruption", ErrorCode::kBadChecksum,
       [&] {
         const auto r = rng.NextU64();
         return Mutation([r](const std::vector<std::uint8_t>& f) {
           auto g = f;
           // Flip one bit in the payload or the trailer.
           const auto span = g.size() - nfl::fed::kHeaderSize;
           const auto byte = nfl::fed::kHeaderSize + (r >> 3) % span;
           g[byte] ^= static_cast<std::uint8_t>(1u << (r & 7));
           return std::vector<std::vector<std::uint8_t>>{g};
         });
       }},
      {"duplicate DELTA", ErrorCode::kDuplicateClient,
       [&] {
         return Mutation([](const std::vector<std::uint8_t>& f) {
           return std::vector<std::vector<std::uint8_t>>{f, f};
         });
       }},
  };
  for (const auto& kind : kinds) {
    int runs = 0, designated = 0, client_informed = 0;
    for (int i = 0; i < 40; ++i) {
      std::optional<ErrorCode> seen;
      const auto code = FuzzInProcess(kind.make(), &seen);
      ++runs;
      designated += code == kind.expected;
      client_informed += seen == kind.expected;
    }
    out.Check(designated == runs, kind.name + ": " + std::to_string(runs - designated) +
                                      " in-process runs gave another error");
    out.Check(client_informed == runs, kind.name + ": client not told the designated error");
    const auto p = FuzzServeProcess(kind.make(), std::to_string(static_cast<int>(kind.expected)));
    const std::string want = "nfl: " + std::string(nfl::ErrorCodeName(kind.expected)) + ":";
    out.Check(p.exit_code == 1 && p.stderr_text.find(want) != std::string::npos,
              kind.name + " against serve: exit " +
                  (p.exit_code ? std::to_string(*p.exit_code) : "none") + ", stderr " + p.stderr_text);
    out.Note(kind.name + ": " + std::to_string(runs) + " in-process + 1 socket process -> " +
             std::string(nfl::ErrorCodeName(kind.expected)));
  }
  return out;
}

// ---------------------------------------------------------------- AC7
Outcome Determinism() {
  Outcome out;
  std::vector<fs::path> dirs;
  for (const char* tag : {"a", "b"}) {
    const auto dir = Scratch() / ("determinism_" + std::string(tag));
    const auto r = nfl::testing::RunProcess(
        {NFL_CLI_PATH, "simulate", "--seed", "1", "--out", dir.string()},
        Scratch() / ("determinism_log_" + std::string(tag)), 300s);
    out.Check(r.exit_code == 0, std::string("simulate run ") + tag + " failed: " + r.err);
    dirs.push_back(dir);
  }
  int compared = 0;
  std::vector<std::string> names = {"metrics.jsonl", "config.json", "global.nfw"};
  for (int k = 0; k < 5; ++k) names.push_back("client_" + std::to_string(k) + ".nfw");
  for (const auto& name : names) {
    const bool both = fs::exists(dirs[0] / name) && fs::exists(dirs[1] / name);
    out.Check(both, name + " missing");
    if (!both) continue;
    const auto a = nfl::testing::ReadText(dirs[0] / name);
    out.Check(!a.empty() && a == nfl::testing::ReadText(dirs[1] / name), name + " differs");
    ++compared;
  }
  out.Note(std::to_string(compared) + " files byte-identical across two runs");
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* name;
    double limit_s;  // 0 = no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1", "quantization suite", 30, Quantization},
      {"AC2", "SOEL oracle equivalence", 60, SoelOracle},
      {"AC3", "sum-of-products equivalence", 60, SumOfProducts},
      {"AC4", "trace kernel fidelity", 10, TraceKernel},
      {"AC5", "desk-scale federated experiment", 300, FederatedExperiment},
      {"AC6", "transport equivalence and protocol fuzzing", 120, Transport},
      {"AC7", "determinism", 0, Determinism},
  };
  fs::create_directories(Scratch());
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.Check(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_s > 0) {
      out.Check(secs < c.limit_s, "runtime " + Fmt("%.1f", secs) + " s over the " +
                                      Fmt("%.0f", c.limit_s) + " s limit");
    }
    std::printf("%s %s: %s (%.1f s%s)\n", out.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                c.limit_s > 0 ? Fmt(", limit %.0f s", c.limit_s).c_str() : "");
    for (const auto& n : out.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
    failures += !out.pass;
  }
  fs::remove_all(Scratch());
  std::printf("%s: %d of %zu criteria passed\n", failures ? "FAIL" : "PASS",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures ? 1 : 0;
}
