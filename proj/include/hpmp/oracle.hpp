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

#include "hpmp/pipeline.hpp"
#include "hpmp/types.hpp"

namespace hpmp
{

  /// Reference verdict computed byte by byte straight from the raw
  /// register values. Shares no decoding, matching, permission or
  /// translation code with checkAccess, so the two can be compared.
  AccessVerdict oracleCheck(const MachineState& state, const AccessRequest& req);

}
