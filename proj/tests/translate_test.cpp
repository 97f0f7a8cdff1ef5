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

#include <random>

#include "fixtures.hpp"
#include "gtest/gtest.h"
#include "random_machine.hpp"
#include "table1.hpp"

namespace {

using ::hpmp::AccessKind;
using ::hpmp::AccessRequest;
using ::hpmp::CsrFile;
using ::hpmp::CsrName;
using ::hpmp::PhysicalAddress;
using ::hpmp::PrivilegeContext;
using ::hpmp::PrivilegeMode;
using ::hpmp::translateHit;

AccessRequest vs(uint64_t gpa, unsigned size = 4) {
  return AccessRequest::make(gpa, size, AccessKind::Execute,
                             PrivilegeContext::make(PrivilegeMode::VS, "VM2"));
}

TEST(TranslateHitTest, AddsOddEntryOffset) {
  CsrFile file;
  file.write(CsrName::Offset, 11, 0x8'0000 >> 2);
  auto pa = translateHit(file, 11, vs(0x800C'0000));
  ASSERT_TRUE(pa);
  EXPECT_EQ(pa->value, 0x800C'0000ull + 0x8'0000ull);
  EXPECT_EQ(pa->value, 0x8014'0000u);
}

TEST(TranslateHitTest, ZeroOffsetIsIdentity) {
  CsrFile file;
  auto pa = translateHit(file, 13, vs(0x9000'0000));
  ASSERT_TRUE(pa);
  EXPECT_EQ(pa->value, 0x9000'0000u);
}

TEST(TranslateHitTest, HypervisorAccessesAreNotTranslated) {
  CsrFile file;
  file.write(CsrName::Offset, 17, 0x1234'5678);
  auto hs = AccessRequest::make(0x9080'0000, 4, AccessKind::Read,
                                PrivilegeContext::make(PrivilegeMode::HS));
  auto pa = translateHit(file, 17, hs);
  ASSERT_TRUE(pa);
  EXPECT_EQ(pa->value, 0x9080'0000u);
}

TEST(TranslateHitTest, OverflowPastAddressSpaceFaults) {
  CsrFile file;
  file.write(CsrName::Offset, 1, 0xffff'ffff);   // byte offset 0x3_FFFF_FFFC
  ASSERT_EQ(file.byteOffset(1), 0x3'FFFF'FFFCull);
  EXPECT_FALSE(translateHit(file, 1, vs(0x8)).has_value());
  // The last byte lands exactly on 2^34 - 1: still representable.
  auto pa = translateHit(file, 1, vs(0x0));
  ASSERT_TRUE(pa);
  EXPECT_EQ(pa->value + 4, hpmp::kAddressSpaceSize);
  EXPECT_FALSE(translateHit(file, 1, vs(0x4)).has_value());
}

TEST(TranslatePropertyTest, PreservesDistancesWithinRegion) {
  std::mt19937_64 rng(hpmp::testing::harnessSeed() + 4);
  for (int i = 0; i < 5000; ++i) {
    CsrFile file;
    unsigned entry = 2 * unsigned(rng() % 32) + 1;
    file.write(CsrName::Offset, entry, uint32_t(rng() % 0x1000'0000));
    uint64_t a = (rng() % 0x1'0000'0000) & ~3ull;
    uint64_t b = (rng() % 0x1'0000'0000) & ~3ull;
    auto pa = translateHit(file, entry, vs(a));
    auto pb = translateHit(file, entry, vs(b));
    ASSERT_TRUE(pa && pb);
    ASSERT_EQ(int64_t(pa->value - pb->value), int64_t(a - b));

    auto hs = AccessRequest::make(a, 4, AccessKind::Read,
                                  PrivilegeContext::make(PrivilegeMode::HS));
    ASSERT_EQ(translateHit(file, entry, hs)->value, a);
    ASSERT_EQ(translateHit(file, entry ^ 2, vs(a))->value, a);  // other entry, offset 0
  }
}

TEST(TranslateTest, UpdatedVm2CodeImageIsDisjointFromVm1Code) {
  using hpmp::testing::kTable1;
  using hpmp::testing::kUpdatedCodeVm1End;
  using hpmp::testing::kVm2CodeOffset;
  CsrFile file;
  file.write(CsrName::Offset, 11, uint32_t(kVm2CodeOffset >> 2));

  const auto& codeVm2 = kTable1[5];
  auto lo = translateHit(file, 11, vs(codeVm2.start));
  auto hi = translateHit(file, 11, vs(codeVm2.endInclusive - 3));
  ASSERT_TRUE(lo && hi);
  EXPECT_EQ(lo->value, 0x8014'0000u);
  EXPECT_EQ(hi->value + 3, 0x801B'FFFFu);

  // VM1 code after the resize: [0x8004_0000, 0x800F_FFFF].
  uint64_t vm1Lo = kTable1[4].start, vm1Hi = kUpdatedCodeVm1End;
  EXPECT_TRUE(hi->value + 3 < vm1Lo || vm1Hi < lo->value);
}

}  // namespace
