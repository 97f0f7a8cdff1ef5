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
#include <stdexcept>
#include <string>
#include <string_view>

namespace hpmp
{

  /// Number of implemented hPMP/vSPMP entries.
  inline constexpr unsigned kNumEntries = 64;

  /// Size of the modeled physical (and guest-physical) address space:
  /// RV32 with 34-bit physical addresses.
  inline constexpr uint64_t kAddressSpaceSize = uint64_t(1) << 34;

  /// Raised for invalid register indices, malformed contexts and
  /// configuration documents that violate an invariant.
  class ConfigError : public std::runtime_error
  {
  public:
    using std::runtime_error::runtime_error;
  };

  /// Raised when an access is evaluated while a switch transaction is
  /// open on the machine.
  class AtomicityViolation : public std::logic_error
  {
  public:
    using std::logic_error::logic_error;
  };

  enum class AccessKind : uint8_t { Read, Write, Execute };

  enum class PrivilegeMode : uint8_t { M, HS, VS, VU };

  /// Privilege context of the hart issuing an access. VS/VU run inside a
  /// VM (V=1) and name it; M/HS run with V=0.
  struct PrivilegeContext
  {
    bool v = false;
    PrivilegeMode mode = PrivilegeMode::M;
    std::optional<std::string> vmId;

    /// Build a context, deriving the V bit from the mode. Throws
    /// ConfigError if a virtualized mode has no VM id.
    static PrivilegeContext make(PrivilegeMode mode,
                                 std::optional<std::string> vmId = {});

    bool operator==(const PrivilegeContext&) const = default;
  };

  /// One memory access. Addresses are guest-physical when ctx.v is set
  /// and physical otherwise.
  struct AccessRequest
  {
    uint64_t gpa = 0;
    unsigned size = 4;
    AccessKind kind = AccessKind::Read;
    PrivilegeContext ctx;

    /// Build a well-formed request. Throws ConfigError on a size outside
    /// {1,2,4}, a misaligned address or an access past the top of the
    /// 34-bit address space.
    static AccessRequest make(uint64_t gpa, unsigned size, AccessKind kind,
                              PrivilegeContext ctx);

    bool wellFormed() const;
  };

  std::string_view toString(AccessKind kind);
  std::string_view toString(PrivilegeMode mode);

  /// Parse "R"/"W"/"X" (or "Read"/"Write"/"Execute"). Throws ConfigError.
  AccessKind parseAccessKind(std::string_view text);

  /// Parse "M", "HS", "VS" or "VU". Throws ConfigError.
  PrivilegeMode parsePrivilegeMode(std::string_view text);

  /// Format as 0x-prefixed lowercase hex.
  std::string hex(uint64_t value);

}
