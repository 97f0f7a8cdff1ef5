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

#pragma once

#include <string>
#include <vector>

#include "hpmp/scenario.hpp"

// JSON Lines rendering of scenario results. Every function returns one
// JSON object per element, without trailing newlines. Addresses are
// rendered as 0x-prefixed hex strings.

namespace hpmp
{

  std::string verdictLine(const VerdictRecord& record);

  /// Terminating record of a trace run.
  std::string summaryLine(const TraceReport& report);

  std::vector<std::string> traceLines(const TraceReport& report);

  /// One record per configured region with both the byte view
  /// (base, end_inclusive) and the encoded register values, followed by
  /// one record per VM. Region records load back as config regions.
  std::vector<std::string> dumpLines(const ScenarioConfig& cfg, const Hypervisor& hv);

  std::vector<std::string> updateLines(const std::vector<ProbeOutcome>& outcomes);

  std::vector<std::string> genericLines(const GenericReport& report);

  std::string benchLine(const SwitchBench& bench);

}
