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

#include "hpmp/types.hpp"

#include <cinttypes>
#include <cstdio>

namespace hpmp
{

  PrivilegeContext
  PrivilegeContext::make(PrivilegeMode mode, std::optional<std::string> vmId)
  {
    PrivilegeContext ctx;
    ctx.mode = mode;
    ctx.v = (mode == PrivilegeMode::VS or mode == PrivilegeMode::VU);
    if (ctx.v)
      {
        if (not vmId or vmId->empty())
          throw ConfigError("virtualized mode " + std::string(toString(mode)) +
                            " requires a VM id");
        ctx.vmId = std::move(vmId);
      }
    return ctx;
  }


  bool
  AccessRequest::wellFormed() const
  {
    if (size != 1 and size != 2 and size != 4)
      return false;
    if (gpa % size != 0)
      return false;
    if (gpa >= kAddressSpaceSize or kAddressSpaceSize - gpa < size)
      return false;
    bool virtualized = ctx.mode == PrivilegeMode::VS or ctx.mode == PrivilegeMode::VU;
    return ctx.v == virtualized and (not virtualized or ctx.vmId);
  }


  AccessRequest
  AccessRequest::make(uint64_t gpa, unsigned size, AccessKind kind,
                      PrivilegeContext ctx)
  {
    AccessRequest req{gpa, size, kind, std::move(ctx)};
    if (size != 1 and size != 2 and size != 4)
      throw ConfigError("access size must be 1, 2 or 4, got " + std::to_string(size));
    if (gpa % size != 0)
      throw ConfigError("misaligned access at " + hex(gpa) + " of size " +
                        std::to_string(size));
    if (gpa >= kAddressSpaceSize or kAddressSpaceSize - gpa < size)
      throw ConfigError("access at " + hex(gpa) + " exceeds the 34-bit address space");
    if (not req.wellFormed())
      throw ConfigError("inconsistent privilege context");
    return req;
  }


  std::string_view
  toString(AccessKind kind)
  {
    switch (kind)
      {
      case AccessKind::Read:    return "R";
      case AccessKind::Write:   return "W";
      case AccessKind::Execute: return "X";
      }
    return "?";
  }


  std::string_view
  toString(PrivilegeMode mode)
  {
    switch (mode)
      {
      case PrivilegeMode::M:  return "M";
      case PrivilegeMode::HS: return "HS";
      case PrivilegeMode::VS: return "VS";
      case PrivilegeMode::VU: return "VU";
      }
    return "?";
  }


  AccessKind
  parseAccessKind(std::string_view text)
  {
    if (text == "R" or text == "Read")
      return AccessKind::Read;
    if (text == "W" or text == "Write")
      return AccessKind::Write;
    if (text == "X" or text == "Execute")
      return AccessKind::Execute;
    throw ConfigError("unknown access kind '" + std::string(text) + "'");
  }


  PrivilegeMode
  parsePrivilegeMode(std::string_view text)
  {
    if (text == "M")  return PrivilegeMode::M;
    if (text == "HS") return PrivilegeMode::HS;
    if (text == "VS") return PrivilegeMode::VS;
    if (text == "VU") return PrivilegeMode::VU;
    throw ConfigError("unknown privilege mode '" + std::string(text) + "'");
  }


  std::string
  hex(uint64_t value)
  {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "0x%" PRIx64, value);
    return buf;
  }

}
