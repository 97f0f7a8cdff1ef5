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

#include <compare>
#include <cstdint>
#include <optional>

#include "hpmp/csr.hpp"
#include "hpmp/types.hpp"

namespace hpmp
{

  /// A 34-bit host physical byte address.
  struct PhysicalAddress
  {
    uint64_t value = 0;

    auto operator<=>(const PhysicalAddress&) const = default;
  };

  /// Translate an access that hit the region whose odd entry is
  /// `entryIndex`. With V=1 the entry's offset is added to the
  /// guest-physical address; with V=0 the address passes through.
  /// Returns nullopt (translation overflow) when the shifted access would
  /// extend past the 34-bit address space. Offsets never wrap.
  std::optional<PhysicalAddress> translateHit(const CsrFile& file, unsigned entryIndex,
                                              const AccessRequest& req);

}
