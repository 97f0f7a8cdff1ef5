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

#include "hpmp/pipeline.hpp"

#include <cassert>
#include <stdexcept>
#include <string>
#include <vector>

namespace hpmp
{

  namespace
  {
    AccessVerdict
    deny(AccessVerdict verdict, Stage stage, DenyReason reason)
    {
      verdict.permitted = false;
      verdict.stage = stage;
      verdict.reason = reason;
      verdict.pa.reset();
      return verdict;
    }

    const ByteRegion&
    regionFor(const std::vector<ByteRegion>& regions, const MatchResult& hit)
    {
      for (const auto& region : regions)
        if (region.entryIndex == hit.entryIndex)
          return region;
      throw std::logic_error("hit on an entry that was not decoded");
    }

    DenyReason
    matchFailure(const MatchResult& match)
    {
      return match.outcome == MatchResult::Outcome::SpanViolation
        ? DenyReason::SpanViolation : DenyReason::NoMatch;
    }
  }


  std::string_view
  toString(Stage stage)
  {
    return stage == Stage::Vspmp ? "vspmp" : "hpmp";
  }


  Stage
  parseStage(std::string_view text)
  {
    if (text == "vspmp") return Stage::Vspmp;
    if (text == "hpmp")  return Stage::Hpmp;
    throw ConfigError("unknown stage '" + std::string(text) + "'");
  }


  AccessVerdict
  checkAccess(const MachineState& state, const AccessRequest& req)
  {
    assert(req.wellFormed());
    AccessVerdict verdict;

    if (req.ctx.mode == PrivilegeMode::M)
      {
        verdict.permitted = true;
        verdict.pa = PhysicalAddress{req.gpa};
        return verdict;
      }

    ByteSpan span = spanOf(req);

    if (req.ctx.v)
      {
        auto guestRegions = decodeRegions(state.vspmp);
        auto match = matchAccess(guestRegions, state.vspmp.enableMask(), span);
        if (not match.isHit())
          return deny(verdict, Stage::Vspmp, matchFailure(match));
        verdict.vspmpEntry = match.entryIndex;

        bool supervisor = req.ctx.mode == PrivilegeMode::VS;
        if (auto why = checkRule(regionFor(guestRegions, match), req.kind, supervisor))
          return deny(verdict, Stage::Vspmp, *why);
      }

    auto hostRegions = decodeRegions(state.hpmp);
    auto match = matchAccess(hostRegions, state.hpmp.pmp().enableMask(), span);
    if (not match.isHit())
      return deny(verdict, Stage::Hpmp, matchFailure(match));
    verdict.hpmpEntry = match.entryIndex;

    if (auto why = checkPermission(regionFor(hostRegions, match), req))
      return deny(verdict, Stage::Hpmp, *why);

    auto pa = translateHit(state.hpmp, match.entryIndex, req);
    if (not pa)
      return deny(verdict, Stage::Hpmp, DenyReason::TranslationOverflow);

    verdict.permitted = true;
    verdict.pa = pa;
    return verdict;
  }

}
