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

#include "hpmp/translate.hpp"

namespace hpmp
{

  std::optional<PhysicalAddress>
  translateHit(const CsrFile& file, unsigned entryIndex, const AccessRequest& req)
  {
    if (not req.ctx.v)
      return PhysicalAddress{req.gpa};

    uint64_t offset = file.byteOffset(entryIndex);
    uint64_t pa = req.gpa + offset;   // < 2^35, no 64-bit overflow.
    if (pa + req.size > kAddressSpaceSize)
      return std::nullopt;
    return PhysicalAddress{pa};
  }

}
