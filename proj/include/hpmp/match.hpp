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
#include <span>
#include <string_view>

#include "hpmp/csr.hpp"
#include "hpmp/types.hpp"

namespace hpmp
{

  /// A contiguous run of bytes [addr, addr + size).
  struct ByteSpan
  {
    uint64_t addr = 0;
    unsigned size = 1;
  };

  inline ByteSpan spanOf(const AccessRequest& req)
  { return ByteSpan{req.gpa, req.size}; }

  struct MatchResult
  {
    enum class Outcome : uint8_t { Hit, NoMatch, SpanViolation };

    Outcome outcome = Outcome::NoMatch;
    unsigned regionIndex = 0;   // Valid on Hit.
    unsigned entryIndex = 0;    // Valid on Hit.

    static MatchResult hit(const ByteRegion& region)
    { return {Outcome::Hit, region.regionIndex(), region.entryIndex}; }

    static MatchResult noMatch()
    { return {}; }

    static MatchResult spanViolation()
    { return {Outcome::SpanViolation, 0, 0}; }

    bool isHit() const
    { return outcome == Outcome::Hit; }

    bool operator==(const MatchResult&) const = default;
  };

  enum class DenyReason : uint8_t
  {
    NoMatch,
    SpanViolation,
    SMismatch,
    PermsMiss,
    TranslationOverflow,
  };

  std::string_view toString(DenyReason reason);
  DenyReason parseDenyReason(std::string_view text);

  /// Find the region governing an access. Active regions (enable bit of
  /// their odd entry set) are scanned in ascending entry order; the first
  /// one containing any byte of the span decides. It is a Hit when it
  /// contains every byte and a SpanViolation otherwise. Disabled and empty
  /// regions are invisible.
  MatchResult matchAccess(std::span<const ByteRegion> regions, uint64_t enableMask,
                          ByteSpan span);

  /// Evaluate one rule for an access kind. `supervisorRule` is the S
  /// value the rule must carry for the requesting context. Returns nullopt
  /// when permitted.
  std::optional<DenyReason> checkRule(const ByteRegion& region, AccessKind kind,
                                      bool supervisorRule);

  /// Second-stage (hPMP) permission check for a hit. V=1 accesses need
  /// an S=0 rule, HS accesses an S=1 rule; the perms bit for the kind
  /// must be set. Not meaningful for M-mode, which bypasses protection.
  std::optional<DenyReason> checkPermission(const ByteRegion& region,
                                            const AccessRequest& req);

}
