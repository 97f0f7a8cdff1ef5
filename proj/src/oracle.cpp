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

#include "hpmp/oracle.hpp"

#include <optional>

namespace hpmp
{

  namespace
  {
    // Raw register view, independent of the decoded region model.
    struct RawFile
    {
      uint32_t addr[kNumEntries];
      uint8_t cfg[kNumEntries];
      bool enabled[kNumEntries];
      uint32_t offset[kNumEntries];
    };

    RawFile
    snapshot(const PmpRegisters& regs)
    {
      RawFile raw{};
      for (unsigned i = 0; i < kNumEntries; ++i)
        {
          raw.addr[i] = regs.read(CsrName::Addr, i);
          raw.cfg[i] = uint8_t((regs.read(CsrName::Cfg, i / 4) >> ((i % 4) * 8)) & 0xff);
          raw.enabled[i] = (regs.read(CsrName::Switch, i / 32) >> (i % 32)) & 1;
        }
      return raw;
    }

    /// Lowest active TOR couple (odd entry number) owning the byte.
    std::optional<unsigned>
    owner(const RawFile& raw, uint64_t byte)
    {
      for (unsigned entry = 0; entry < kNumEntries; ++entry)
        {
          if (entry % 2 == 0)
            continue;
          unsigned a = (raw.cfg[entry] >> 3) & 3;
          if (a != 1 or not raw.enabled[entry])
            continue;
          uint64_t lo = uint64_t(raw.addr[entry - 1]) * 4;
          uint64_t hi = uint64_t(raw.addr[entry]) * 4;
          if (lo <= byte and byte < hi)
            return entry;
        }
      return std::nullopt;
    }

    enum class Stage1 { Hit, None, Split };

    /// Classify an access: all bytes owned by one entry (Hit), no byte
    /// owned (None), anything else (Split).
    Stage1
    classify(const RawFile& raw, const AccessRequest& req, unsigned& entry)
    {
      std::optional<unsigned> shared;
      bool anyOwned = false, anyUnowned = false, mixed = false;
      for (uint64_t b = req.gpa; b < req.gpa + req.size; ++b)
        {
          auto who = owner(raw, b);
          if (not who)
            {
              anyUnowned = true;
              continue;
            }
          if (anyOwned and *who != *shared)
            mixed = true;
          anyOwned = true;
          shared = who;
        }
      if (not anyOwned)
        return Stage1::None;
      if (anyUnowned or mixed)
        return Stage1::Split;
      entry = *shared;
      return Stage1::Hit;
    }

    bool
    kindBit(uint8_t cfg, AccessKind kind)
    {
      int bit = kind == AccessKind::Read ? 0 : kind == AccessKind::Write ? 1 : 2;
      return (cfg >> bit) & 1;
    }

    /// Evaluate one stage; fills `verdict` on deny and returns false.
    bool
    stage(const RawFile& raw, const AccessRequest& req, bool wantS, Stage which,
          AccessVerdict& verdict, unsigned& entry)
    {
      Stage1 c = classify(raw, req, entry);
      if (c != Stage1::Hit)
        {
          verdict.stage = which;
          verdict.reason = c == Stage1::None ? DenyReason::NoMatch : DenyReason::SpanViolation;
          return false;
        }
      if (which == Stage::Vspmp)
        verdict.vspmpEntry = entry;
      else
        verdict.hpmpEntry = entry;

      bool s = (raw.cfg[entry] >> 7) & 1;
      if (s != wantS)
        {
          verdict.stage = which;
          verdict.reason = DenyReason::SMismatch;
          return false;
        }
      if (not kindBit(raw.cfg[entry], req.kind))
        {
          verdict.stage = which;
          verdict.reason = DenyReason::PermsMiss;
          return false;
        }
      return true;
    }
  }


  AccessVerdict
  oracleCheck(const MachineState& state, const AccessRequest& req)
  {
    AccessVerdict verdict;
    if (req.ctx.mode == PrivilegeMode::M)
      {
        verdict.permitted = true;
        verdict.pa = PhysicalAddress{req.gpa};
        return verdict;
      }

    unsigned entry = 0;
    bool guest = req.ctx.mode == PrivilegeMode::VS or req.ctx.mode == PrivilegeMode::VU;
    if (guest)
      {
        RawFile vs = snapshot(state.vspmp);
        bool wantS = req.ctx.mode == PrivilegeMode::VS;
        if (not stage(vs, req, wantS, Stage::Vspmp, verdict, entry))
          return verdict;
      }

    RawFile hs = snapshot(state.hpmp.pmp());
    for (unsigned i = 0; i < kNumEntries; ++i)
      hs.offset[i] = state.hpmp.read(CsrName::Offset, i);

    // Guests are confined by VM rules (S=0); the hypervisor by its own (S=1).
    if (not stage(hs, req, not guest, Stage::Hpmp, verdict, entry))
      return verdict;

    uint64_t pa = req.gpa;
    if (guest)
      pa = req.gpa + uint64_t(hs.offset[entry]) * 4;
    uint64_t last = pa + req.size - 1;
    if (last >= (uint64_t(1) << 34))
      {
        verdict.stage = Stage::Hpmp;
        verdict.reason = DenyReason::TranslationOverflow;
        return verdict;
      }
    verdict.permitted = true;
    verdict.pa = PhysicalAddress{pa};
    return verdict;
  }

}
