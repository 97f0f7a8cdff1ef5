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

#include <cstdint>
#include <optional>
#include <string_view>

#include "hpmp/csr.hpp"
#include "hpmp/match.hpp"
#include "hpmp/translate.hpp"
#include "hpmp/types.hpp"

namespace hpmp
{

  enum class Stage : uint8_t { Vspmp, Hpmp };

  std::string_view toString(Stage stage);
  Stage parseStage(std::string_view text);

  /// Outcome of one access through both protection stages. A permitted
  /// verdict always carries the physical address; a denied one names the
  /// stage and reason. Matched entries are recorded per stage on hits.
  struct AccessVerdict
  {
    bool permitted = false;
    std::optional<Stage> stage;
    std::optional<DenyReason> reason;
    std::optional<PhysicalAddress> pa;
    std::optional<unsigned> vspmpEntry;
    std::optional<unsigned> hpmpEntry;

    bool operator==(const AccessVerdict&) const = default;
  };

  /// Architectural state seen by an access: the HV-owned hPMP file, the
  /// active guest's vSPMP file, the current privilege context and an
  /// opaque token standing in for the rest of the CPU state.
  struct MachineState
  {
    CsrFile hpmp;
    VspmpFile vspmp;
    PrivilegeContext ctx;
    uint64_t cpuState = 0;

    bool operator==(const MachineState&) const = default;
  };

  /// Evaluate an access against both stages.
  ///  - M: bypass, permitted with the identity translation.
  ///  - HS: hPMP with S=1 rules, no translation.
  ///  - VS/VU: vSPMP first (VS needs S=1 rules, VU S=0 rules, no
  ///    translation), then hPMP on the same guest-physical address with
  ///    S=0 rules and offset translation.
  /// The request must be well formed.
  AccessVerdict checkAccess(const MachineState& state, const AccessRequest& req);

}
