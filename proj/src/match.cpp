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

#include "hpmp/match.hpp"

#include <string>

namespace hpmp
{

  std::string_view
  toString(DenyReason reason)
  {
    switch (reason)
      {
      case DenyReason::NoMatch:             return "no_match";
      case DenyReason::SpanViolation:       return "span_violation";
      case DenyReason::SMismatch:           return "s_mismatch";
      case DenyReason::PermsMiss:           return "perms_miss";
      case DenyReason::TranslationOverflow: return "overflow";
      }
    return "?";
  }


  DenyReason
  parseDenyReason(std::string_view text)
  {
    for (auto r : {DenyReason::NoMatch, DenyReason::SpanViolation, DenyReason::SMismatch,
                   DenyReason::PermsMiss, DenyReason::TranslationOverflow})
      if (text == toString(r))
        return r;
    throw ConfigError("unknown deny reason '" + std::string(text) + "'");
  }


  MatchResult
  matchAccess(std::span<const ByteRegion> regions, uint64_t enableMask, ByteSpan span)
  {
    uint64_t first = span.addr;
    uint64_t end = span.addr + span.size;

    for (const auto& region : regions)
      {
        if (((enableMask >> region.entryIndex) & 1) == 0 or region.empty())
          continue;
        bool touches = region.base < end and first < region.top;
        if (not touches)
          continue;
        if (region.base <= first and end <= region.top)
          return MatchResult::hit(region);
        return MatchResult::spanViolation();
      }
    return MatchResult::noMatch();
  }


  std::optional<DenyReason>
  checkRule(const ByteRegion& region, AccessKind kind, bool supervisorRule)
  {
    if (region.s != supervisorRule)
      return DenyReason::SMismatch;
    if (not region.perms.allows(kind))
      return DenyReason::PermsMiss;
    return std::nullopt;
  }


  std::optional<DenyReason>
  checkPermission(const ByteRegion& region, const AccessRequest& req)
  {
    // V=1 traffic is governed by VM (S=0) rules, HS traffic by HV (S=1) rules.
    return checkRule(region, req.kind, not req.ctx.v);
  }

}
