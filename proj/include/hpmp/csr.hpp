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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hpmp/types.hpp"

namespace hpmp
{

  /// Address matching mode of an entry. Only the OFF-TOR subset is
  /// implemented; NA4/NAPOT encodings are reserved.
  enum class MatchMode : uint8_t { Off = 0, Tor = 1 };

  /// Read/write/execute permission set of a rule.
  struct Perms
  {
    bool r = false;
    bool w = false;
    bool x = false;

    bool allows(AccessKind kind) const;

    /// "RW", "RX", "R", "RWX", ... ("-" when empty).
    std::string toString() const;

    /// Parse a permission string made of the letters R, W and X in that
    /// order. Throws ConfigError.
    static Perms parse(std::string_view text);

    bool operator==(const Perms&) const = default;
  };

  /// One 8-bit entry configuration field:
  ///   bit 0 R, bit 1 W, bit 2 X, bits 3..4 A, bits 5..6 zero, bit 7 S.
  struct EntryCfg
  {
    Perms perms;
    MatchMode mode = MatchMode::Off;
    bool s = false;

    uint8_t encode() const;

    /// Decode a cfg byte. Returns nullopt for the reserved A encodings
    /// 0b10 and 0b11. Bits 5..6 are ignored.
    static std::optional<EntryCfg> decode(uint8_t byte);

    /// Human-readable form in the style "S TOR RW" / "- TOR RX" / "OFF".
    std::string toString() const;

    bool operator==(const EntryCfg&) const = default;
  };

  enum class CsrName : uint8_t { Addr, Cfg, Switch, Offset };

  std::string_view toString(CsrName name);

  /// Parse "hpmpaddr", "hpmpcfg", "hpmpswitch" or "hpmpoffset".
  CsrName parseCsrName(std::string_view text);

  /// Number of registers behind a CSR name.
  unsigned csrCount(CsrName name);

  /// Address, configuration and enable registers shared by the hPMP and
  /// the guest-owned vSPMP. Entry i's cfg lives in byte i%4 of cfg
  /// register i/4; bit i of the 64-bit switch bitmap (switch register
  /// i/32) enables entry i.
  class PmpRegisters
  {
  public:

    /// Write a register with WARL legalization:
    ///  - cfg bytes carrying a reserved A value, or TOR on an even entry,
    ///    keep their previous value (other bytes of the word still apply);
    ///  - cfg bits 5..6 read as zero.
    /// Throws ConfigError on an out-of-range index or on CsrName::Offset,
    /// leaving the registers untouched.
    void write(CsrName name, unsigned index, uint32_t value);

    /// Throws ConfigError on an out-of-range index or CsrName::Offset.
    uint32_t read(CsrName name, unsigned index) const;

    /// Decoded configuration of the given entry.
    EntryCfg entryCfg(unsigned entry) const;

    /// The 64-bit enable bitmap assembled from both switch registers.
    uint64_t enableMask() const
    { return (uint64_t(switch_[1]) << 32) | switch_[0]; }

    bool operator==(const PmpRegisters&) const = default;

  private:

    std::array<uint32_t, kNumEntries> addr_{};
    std::array<uint32_t, kNumEntries / 4> cfg_{};
    std::array<uint32_t, 2> switch_{};
  };

  /// The vSPMP register file carries no offset registers.
  using VspmpFile = PmpRegisters;

  /// The hypervisor-owned hPMP register file: PMP registers plus one
  /// hpmpoffset register per entry holding offset bits [33:2]. Offsets of
  /// even entries are hardwired to zero.
  class CsrFile
  {
  public:

    /// Register write. Writes to an even hpmpoffset are ignored. See
    /// PmpRegisters::write for the remaining rules.
    void write(CsrName name, unsigned index, uint32_t value);

    uint32_t read(CsrName name, unsigned index) const;

    const PmpRegisters& pmp() const
    { return pmp_; }

    /// Byte offset applied to hits on the given entry (register << 2).
    uint64_t byteOffset(unsigned entry) const;

    bool operator==(const CsrFile&) const = default;

  private:

    PmpRegisters pmp_;
    std::array<uint32_t, kNumEntries> offset_{};
  };

  /// A protection region decoded from an OFF-TOR couple (entries 2k and
  /// 2k+1), in byte addresses with an exclusive top.
  struct ByteRegion
  {
    uint64_t base = 0;
    uint64_t top = 0;
    Perms perms;
    bool s = false;
    unsigned entryIndex = 1;

    /// Couple number k.
    unsigned regionIndex() const
    { return entryIndex / 2; }

    bool contains(uint64_t addr) const
    { return base <= addr and addr < top; }

    bool empty() const
    { return base >= top; }

    bool operator==(const ByteRegion&) const = default;
  };

  /// Decode every couple whose odd entry is TOR, in ascending entry
  /// order. Couples with base >= top are emitted; they match nothing.
  std::vector<ByteRegion> decodeRegions(const PmpRegisters& regs);

  inline std::vector<ByteRegion> decodeRegions(const CsrFile& file)
  { return decodeRegions(file.pmp()); }

}
