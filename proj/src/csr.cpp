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

#include "hpmp/csr.hpp"

namespace hpmp
{

  namespace
  {
    constexpr uint8_t kR = 1u << 0;
    constexpr uint8_t kW = 1u << 1;
    constexpr uint8_t kX = 1u << 2;
    constexpr unsigned kAShift = 3;
    constexpr uint8_t kAMask = 3u << kAShift;
    constexpr uint8_t kS = 1u << 7;

    void
    checkIndex(CsrName name, unsigned index)
    {
      if (index >= csrCount(name))
        throw ConfigError(std::string(toString(name)) + std::to_string(index) +
                          " does not exist (index range 0.." +
                          std::to_string(csrCount(name) - 1) + ")");
    }

    /// Return the legalized cfg byte for a write of `next` into entry
    /// `entry` currently holding `prev`.
    uint8_t
    legalizeCfg(unsigned entry, uint8_t prev, uint8_t next)
    {
      auto cfg = EntryCfg::decode(next);
      if (not cfg)
        return prev;
      if (entry % 2 == 0 and cfg->mode != MatchMode::Off)
        return prev;
      return cfg->encode();
    }
  }


  bool
  Perms::allows(AccessKind kind) const
  {
    switch (kind)
      {
      case AccessKind::Read:    return r;
      case AccessKind::Write:   return w;
      case AccessKind::Execute: return x;
      }
    return false;
  }


  std::string
  Perms::toString() const
  {
    std::string out;
    if (r) out += 'R';
    if (w) out += 'W';
    if (x) out += 'X';
    return out.empty() ? "-" : out;
  }


  Perms
  Perms::parse(std::string_view text)
  {
    Perms perms;
    if (text == "-")
      return perms;
    std::string_view order = "RWX";
    size_t pos = 0;
    for (char c : text)
      {
        size_t at = order.find(c, pos);
        if (at == std::string_view::npos)
          throw ConfigError("malformed permission string '" + std::string(text) + "'");
        pos = at + 1;
        if (c == 'R') perms.r = true;
        if (c == 'W') perms.w = true;
        if (c == 'X') perms.x = true;
      }
    if (text.empty())
      throw ConfigError("empty permission string");
    return perms;
  }


  uint8_t
  EntryCfg::encode() const
  {
    uint8_t byte = 0;
    if (perms.r) byte |= kR;
    if (perms.w) byte |= kW;
    if (perms.x) byte |= kX;
    byte |= uint8_t(unsigned(mode) << kAShift);
    if (s) byte |= kS;
    return byte;
  }


  std::optional<EntryCfg>
  EntryCfg::decode(uint8_t byte)
  {
    unsigned a = (byte & kAMask) >> kAShift;
    if (a > unsigned(MatchMode::Tor))
      return std::nullopt;
    EntryCfg cfg;
    cfg.perms = Perms{bool(byte & kR), bool(byte & kW), bool(byte & kX)};
    cfg.mode = MatchMode(a);
    cfg.s = byte & kS;
    return cfg;
  }


  std::string
  EntryCfg::toString() const
  {
    if (mode == MatchMode::Off)
      return "OFF";
    return std::string(s ? "S" : "-") + " TOR " + perms.toString();
  }


  std::string_view
  toString(CsrName name)
  {
    switch (name)
      {
      case CsrName::Addr:   return "hpmpaddr";
      case CsrName::Cfg:    return "hpmpcfg";
      case CsrName::Switch: return "hpmpswitch";
      case CsrName::Offset: return "hpmpoffset";
      }
    return "?";
  }


  CsrName
  parseCsrName(std::string_view text)
  {
    for (auto name : {CsrName::Addr, CsrName::Cfg, CsrName::Switch, CsrName::Offset})
      if (text == toString(name))
        return name;
    throw ConfigError("unknown CSR '" + std::string(text) + "'");
  }


  unsigned
  csrCount(CsrName name)
  {
    switch (name)
      {
      case CsrName::Addr:   return kNumEntries;
      case CsrName::Cfg:    return kNumEntries / 4;
      case CsrName::Switch: return 2;
      case CsrName::Offset: return kNumEntries;
      }
    return 0;
  }


  void
  PmpRegisters::write(CsrName name, unsigned index, uint32_t value)
  {
    if (name == CsrName::Offset)
      throw ConfigError("PMP register file has no offset registers");
    checkIndex(name, index);

    switch (name)
      {
      case CsrName::Addr:
        addr_[index] = value;
        break;
      case CsrName::Cfg:
        {
          uint32_t prev = cfg_[index];
          uint32_t next = 0;
          for (unsigned byte = 0; byte < 4; ++byte)
            {
              unsigned shift = 8 * byte;
              uint8_t legal = legalizeCfg(4 * index + byte, uint8_t(prev >> shift),
                                          uint8_t(value >> shift));
              next |= uint32_t(legal) << shift;
            }
          cfg_[index] = next;
        }
        break;
      case CsrName::Switch:
        switch_[index] = value;
        break;
      case CsrName::Offset:
        break;
      }
  }


  uint32_t
  PmpRegisters::read(CsrName name, unsigned index) const
  {
    if (name == CsrName::Offset)
      throw ConfigError("PMP register file has no offset registers");
    checkIndex(name, index);
    switch (name)
      {
      case CsrName::Addr:   return addr_[index];
      case CsrName::Cfg:    return cfg_[index];
      case CsrName::Switch: return switch_[index];
      case CsrName::Offset: break;
      }
    return 0;
  }


  EntryCfg
  PmpRegisters::entryCfg(unsigned entry) const
  {
    if (entry >= kNumEntries)
      throw ConfigError("entry " + std::to_string(entry) + " does not exist");
    uint8_t byte = uint8_t(cfg_[entry / 4] >> (8 * (entry % 4)));
    // Stored bytes are always legal.
    return *EntryCfg::decode(byte);
  }


  void
  CsrFile::write(CsrName name, unsigned index, uint32_t value)
  {
    if (name != CsrName::Offset)
      {
        pmp_.write(name, index, value);
        return;
      }
    checkIndex(name, index);
    if (index % 2 == 1)
      offset_[index] = value;
  }


  uint32_t
  CsrFile::read(CsrName name, unsigned index) const
  {
    if (name != CsrName::Offset)
      return pmp_.read(name, index);
    checkIndex(name, index);
    return offset_[index];
  }


  uint64_t
  CsrFile::byteOffset(unsigned entry) const
  {
    return uint64_t(read(CsrName::Offset, entry)) << 2;
  }


  std::vector<ByteRegion>
  decodeRegions(const PmpRegisters& regs)
  {
    std::vector<ByteRegion> regions;
    for (unsigned entry = 1; entry < kNumEntries; entry += 2)
      {
        EntryCfg cfg = regs.entryCfg(entry);
        if (cfg.mode != MatchMode::Tor)
          continue;
        ByteRegion region;
        region.base = uint64_t(regs.read(CsrName::Addr, entry - 1)) << 2;
        region.top = uint64_t(regs.read(CsrName::Addr, entry)) << 2;
        region.perms = cfg.perms;
        region.s = cfg.s;
        region.entryIndex = entry;
        regions.push_back(region);
      }
    return regions;
  }

}
