// Copyright 2026 The hpmp-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// hpmp-sim: command-line front end for the hPMP offset-translation model.
//
// Exit codes: 0 all expectations met, 1 expectation mismatch or scenario
// violation, 2 configuration or parse error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hpmp/oracle.hpp"
#include "hpmp/report.hpp"
#include "hpmp/scenario.hpp"

namespace
{

  constexpr int kOk = 0;
  constexpr int kMismatch = 1;
  constexpr int kConfigError = 2;

  void
  emit(std::ostream& out, const std::vector<std::string>& lines)
  {
    for (const auto& line : lines)
      out << line << '\n';
  }

  uint64_t
  parseAddress(const std::string& text)
  {
    std::string digits;
    for (char c : text)
      if (c != '_')
        digits += c;
    std::size_t used = 0;
    uint64_t value = std::stoull(digits, &used, 0);
    if (used != digits.size())
      throw hpmp::ConfigError("malformed address '" + text + "'");
    return value;
  }

}


int
main(int argc, char** argv)
{
  CLI::App app{"Two-level PMP simulator with per-region offset translation"};
  app.require_subcommand(1);

  std::string configPath;

  auto* check = app.add_subcommand("check", "Evaluate a single access");
  std::string mode = "VS", vm, kind = "R", addr;
  unsigned size = 4;
  bool checkOracle = false;
  check->add_option("config", configPath, "Configuration JSON")->required();
  check->add_option("--mode", mode, "M, HS, VS or VU");
  check->add_option("--vm", vm, "VM id for VS/VU accesses");
  check->add_option("--kind", kind, "R, W or X");
  check->add_option("--size", size, "Access size in bytes (1, 2, 4)");
  check->add_option("--addr", addr, "Guest-physical address")->required();
  check->add_flag("--oracle", checkOracle, "Cross-check with the reference oracle");

  auto* run = app.add_subcommand("run", "Replay a trace");
  std::string tracePath, outPath;
  bool runOracle = false;
  run->add_option("config", configPath, "Configuration JSON")->required();
  run->add_option("--trace", tracePath, "JSON Lines trace (default: the config's trace)");
  run->add_option("--out", outPath, "Write records to this file instead of stdout");
  run->add_flag("--oracle", runOracle, "Cross-check every access with the reference oracle");

  auto* update = app.add_subcommand("update", "Partial-update scenario");
  std::string updatePath, probesPath;
  update->add_option("config", configPath, "Configuration JSON")->required();
  update->add_option("--apply", updatePath, "Update JSON array")->required();
  update->add_option("--probes", probesPath,
                     "JSON Lines probes (default: region corners); expectations apply "
                     "to the post-update verdict");

  auto* generic = app.add_subcommand("generic", "Generic-images scenario");
  generic->add_option("config", configPath, "Configuration JSON")->required();

  auto* bench = app.add_subcommand("switch-bench", "Round-robin switch metrics");
  std::size_t iterations = 1000;
  bench->add_option("config", configPath, "Configuration JSON")->required();
  bench->add_option("--iterations", iterations, "Number of switches");

  auto* dump = app.add_subcommand("dump", "Dump the programmed hPMP state");
  dump->add_option("config", configPath, "Configuration JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try
    {
      hpmp::ScenarioConfig cfg = hpmp::loadConfig(hpmp::readFile(configPath));

      if (*check)
        {
          hpmp::TraceStep step;
          step.mode = hpmp::parsePrivilegeMode(mode);
          step.vm = vm;
          step.kind = hpmp::parseAccessKind(kind);
          step.size = size;
          step.gpa = parseAddress(addr);
          hpmp::TraceReport report = hpmp::runTrace(cfg, std::span(&step, 1), checkOracle);
          std::cout << hpmp::verdictLine(report.records.front()) << '\n';
          return report.passed() ? kOk : kMismatch;
        }

      if (*run)
        {
          std::vector<hpmp::TraceStep> trace = cfg.trace;
          if (not tracePath.empty())
            trace = hpmp::loadTrace(hpmp::readFile(tracePath));
          hpmp::TraceReport report = hpmp::runTrace(cfg, trace, runOracle);
          if (outPath.empty())
            emit(std::cout, hpmp::traceLines(report));
          else
            {
              std::ofstream out(outPath);
              if (not out)
                throw hpmp::ConfigError("cannot write '" + outPath + "'");
              emit(out, hpmp::traceLines(report));
            }
          return report.passed() ? kOk : kMismatch;
        }

      if (*update)
        {
          auto writes = hpmp::loadUpdate(hpmp::readFile(updatePath));
          auto probes = probesPath.empty() ? hpmp::defaultProbes(cfg)
                                           : hpmp::loadTrace(hpmp::readFile(probesPath));
          auto outcomes = hpmp::runPartialUpdate(cfg, writes, probes);
          emit(std::cout, hpmp::updateLines(outcomes));
          for (const auto& outcome : outcomes)
            if (outcome.expectMet == false)
              return kMismatch;
          return kOk;
        }

      if (*generic)
        {
          auto report = hpmp::runGenericImages(cfg);
          emit(std::cout, hpmp::genericLines(report));
          return report.passed() ? kOk : kMismatch;
        }

      if (*bench)
        {
          auto result = hpmp::runSwitchBench(cfg, iterations);
          std::cout << hpmp::benchLine(result) << '\n';
          return result.variance() == 0.0 and result.hvBitsPreserved ? kOk : kMismatch;
        }

      if (*dump)
        {
          emit(std::cout, hpmp::dumpLines(cfg, hpmp::buildHypervisor(cfg)));
          return kOk;
        }
    }
  catch (const hpmp::ConfigError& e)
    {
      std::cerr << "hpmp-sim: " << e.what() << '\n';
      return kConfigError;
    }
  catch (const std::invalid_argument& e)
    {
      std::cerr << "hpmp-sim: malformed number: " << e.what() << '\n';
      return kConfigError;
    }
  return kOk;
}
