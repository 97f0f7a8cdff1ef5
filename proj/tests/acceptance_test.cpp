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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "hpmp/hypervisor.hpp"
#include "hpmp/oracle.hpp"
#include "hpmp/report.hpp"
#include "hpmp/scenario.hpp"
#include "nlohmann/json.hpp"
#include "random_machine.hpp"
#include "table1.hpp"

namespace {

using hpmp::AccessKind;
using hpmp::AccessRequest;
using hpmp::AccessVerdict;
using hpmp::CsrName;
using hpmp::PrivilegeContext;
using hpmp::PrivilegeMode;
using hpmp::testing::fixturePath;
using hpmp::testing::kTable1;
using hpmp::testing::loadFixture;
using json = nlohmann::json;

constexpr double kTable1Budget = 1.0;   // seconds
constexpr double kOracleBudget = 60.0;  // seconds
constexpr std::size_t kOraclePairs = 10000;
constexpr std::size_t kSwitches = 1000;
constexpr std::size_t kOffsetWrites = 1000;
constexpr std::size_t kGenericSteps = 100;

struct Outcome {
  bool pass = true;
  std::string detail;
};

void fail(Outcome& o, const std::string& what) {
  if (o.pass) o.detail = what;
  o.pass = false;
}

std::string hexStr(uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

uint64_t parseHex(const json& v) { return std::stoull(v.get<std::string>(), nullptr, 16); }

AccessRequest vs(const std::string& vm, AccessKind kind, uint64_t gpa) {
  return AccessRequest::make(gpa, 4, kind, PrivilegeContext::make(PrivilegeMode::VS, vm));
}

bool allows(const hpmp::testing::Table1Row& row, AccessKind kind) {
  switch (kind) {
    case AccessKind::Read: return row.r;
    case AccessKind::Write: return row.w;
    case AccessKind::Execute: return row.x;
  }
  return false;
}

// 1. Encoded registers of every reference-map region, compared with values
// computed here from the byte addresses.
Outcome table1Fidelity() {
  Outcome o;
  hpmp::ScenarioConfig cfg = loadFixture("table1.json");
  hpmp::Hypervisor hv = hpmp::buildHypervisor(cfg);
  std::vector<json> regions;
  for (const auto& line : hpmp::dumpLines(cfg, hv)) {
    json record = json::parse(line);
    if (record["type"] == "region") regions.push_back(record);
  }
  if (regions.size() != kTable1.size()) fail(o, "region record count");
  std::size_t addrs = 0, cfgs = 0;
  for (std::size_t i = 0; i < regions.size() && i < kTable1.size(); ++i) {
    const auto& row = kTable1[i];
    const json& rec = regions[i];
    uint64_t wantA = row.start >> 2, wantB = (row.endInclusive + 1) >> 2;
    uint64_t wantCfg = (row.s ? 0x80u : 0u) | 0x08u | (row.x ? 4u : 0u) | (row.w ? 2u : 0u) |
                       (row.r ? 1u : 0u);
    const auto& hpmp = hv.machine().state().hpmp;
    unsigned a = 2 * row.region, b = a + 1;
    uint64_t cfgA = (hpmp.read(CsrName::Cfg, a / 4) >> (8 * (a % 4))) & 0xff;
    uint64_t cfgB = (hpmp.read(CsrName::Cfg, b / 4) >> (8 * (b % 4))) & 0xff;

    if (parseHex(rec["hpmpaddr_a"]) == wantA && hpmp.read(CsrName::Addr, a) == wantA) ++addrs;
    else fail(o, "hpmpaddr" + std::to_string(a));
    if (parseHex(rec["hpmpaddr_b"]) == wantB && hpmp.read(CsrName::Addr, b) == wantB) ++addrs;
    else fail(o, "hpmpaddr" + std::to_string(b));
    if (parseHex(rec["cfg_b_raw"]) == wantCfg && cfgB == wantCfg && cfgA == 0) ++cfgs;
    else fail(o, "cfg of region " + std::to_string(i));
    if (parseHex(rec["base"]) != row.start || parseHex(rec["end_inclusive"]) != row.endInclusive)
      fail(o, "byte view of region " + std::to_string(i));
  }
  if (o.pass) o.detail = std::to_string(addrs) + "/22 hpmpaddr, " + std::to_string(cfgs) +
                         "/11 cfg bytes exact";
  return o;
}

// 2. Region base x {VM1-VS, VM2-VS, HS} x {R,W,X} against the matrix
// implied by ownership, S bits and permissions.
Outcome permissionMatrix() {
  Outcome o;
  hpmp::Hypervisor hv = hpmp::buildHypervisor(loadFixture("table1.json"));
  std::size_t cells = 0, agree = 0;
  for (const auto& row : kTable1) {
    std::string owner(row.owner);
    if (owner != "HV") hv.switchTo(hv.indexOf(owner));
    for (std::string ctx : {"VM1", "VM2", "HS"}) {
      for (AccessKind kind : {AccessKind::Read, AccessKind::Write, AccessKind::Execute}) {
        bool expected;
        AccessVerdict v;
        if (ctx == "HS") {
          expected = row.s && allows(row, kind);
          v = hv.check(AccessRequest::make(row.start, 4, kind,
                                           PrivilegeContext::make(PrivilegeMode::HS)));
        } else {
          expected = owner == ctx && allows(row, kind);
          // A guest only ever runs with its own mask active.
          hpmp::Hypervisor running = hv;
          running.switchTo(running.indexOf(ctx));
          v = running.check(vs(ctx, kind, row.start));
        }
        ++cells;
        bool expectedPa = !v.permitted || v.pa->value == row.start;
        if (v.permitted == expected && expectedPa) ++agree;
        else fail(o, "region " + std::to_string(row.region) + " " + ctx + " " +
                     std::string(hpmp::toString(kind)));
      }
    }
  }
  if (cells != 99) fail(o, "cell count " + std::to_string(cells));
  o.detail = std::to_string(agree) + "/" + std::to_string(cells) + " cells agree" +
             (o.pass ? "" : "; first: " + o.detail);
  return o;
}

// 3. Partial update of VM1's code top and VM2's code offset.
Outcome partialUpdate() {
  Outcome o;
  hpmp::Hypervisor hv = hpmp::buildHypervisor(loadFixture("table1.json"));
  auto update = hpmp::loadUpdate(hpmp::readFile(fixturePath("table2_update.json")));
  std::vector<hpmp::CsrWrite> expected{
      {hpmp::CsrWrite::Bank::Hpmp, CsrName::Addr, 9, uint32_t(0x800F'FFFFull + 1) >> 2},
      {hpmp::CsrWrite::Bank::Hpmp, CsrName::Offset, 11, uint32_t(0x8'0000) >> 2}};
  if (update != expected) fail(o, "update file does not decode to the two writes");
  hv.applyUpdate(update);

  std::size_t granules = 0;
  for (uint64_t gpa = 0x8004'0000; gpa <= 0x800F'FFFC; gpa += 4, ++granules) {
    AccessVerdict v = hv.check(vs("VM1", AccessKind::Execute, gpa));
    if (!v.permitted || v.pa->value != gpa) {
      fail(o, "(a) VM1 X denied at " + hexStr(gpa));
      break;
    }
  }
  AccessVerdict beyond = hv.check(vs("VM1", AccessKind::Execute, 0x8010'0000));
  if (beyond.permitted) fail(o, "(a) VM1 X permitted past 0x800F_FFFF");

  hv.switchTo(hv.indexOf("VM2"));
  AccessVerdict lo = hv.check(vs("VM2", AccessKind::Execute, 0x800C'0000));
  AccessVerdict hi = hv.check(vs("VM2", AccessKind::Execute, 0x8013'FFFC));
  if (!lo.permitted || lo.pa->value != 0x8014'0000) fail(o, "(b) VM2 X 0x800C_0000");
  if (!hi.permitted) fail(o, "(c) VM2 code end");
  if (lo.permitted && hi.permitted) {
    uint64_t vm2Lo = lo.pa->value, vm2Hi = hi.pa->value + 3;
    if (!(vm2Lo > 0x800F'FFFF || vm2Hi < 0x8004'0000)) fail(o, "(c) VM2 code overlaps VM1");
    if (o.pass) o.detail = "VM1 X on " + std::to_string(granules) +
                           " granules; VM2 code at [" + hexStr(vm2Lo) + ", " +
                           hexStr(vm2Hi) + "]";
  }
  return o;
}

// 4. Generic images on a 100-step trace drawn from the shared windows.
Outcome genericImages() {
  Outcome o;
  hpmp::ScenarioConfig cfg = loadFixture("generic.json");
  std::mt19937_64 rng(hpmp::testing::harnessSeed() + 4);
  std::vector<const hpmp::RegionSpec*> windows;
  for (const auto& r : cfg.regions)
    if (r.owner == cfg.vms.front().id) windows.push_back(&r);

  std::vector<hpmp::TraceStep> trace;
  for (std::size_t i = 0; i < kGenericSteps; ++i) {
    const auto& w = *windows[rng() % windows.size()];
    hpmp::TraceStep step;
    step.step = i + 1;
    step.mode = PrivilegeMode::VS;
    step.kind = w.perms.x ? AccessKind::Execute : AccessKind::Read;
    step.gpa = w.base + (rng() % (w.size() / 4)) * 4;
    trace.push_back(step);
  }
  hpmp::GenericReport report = hpmp::runGenericImages(cfg, trace);
  if (report.steps.size() != kGenericSteps) fail(o, "step count");

  std::vector<std::vector<std::pair<uint64_t, uint64_t>>> spans(cfg.vms.size());
  for (std::size_t v = 0; v < cfg.vms.size(); ++v) {
    std::map<uint64_t, uint64_t> offsetByBase;
    for (const auto& off : cfg.vms[v].offsets)
      offsetByBase[cfg.regions[off.region].base] = off.byteOffset;
    for (const auto& step : report.steps) {
      const AccessVerdict& verdict = step.perVm[v];
      const hpmp::RegionSpec* window = nullptr;
      for (auto* w : windows)
        if (w->base <= step.step.gpa && step.step.gpa <= w->endInclusive) window = w;
      uint64_t offset = offsetByBase.count(window->base) ? offsetByBase[window->base] : 0;
      if (!verdict.permitted) {
        fail(o, cfg.vms[v].id + " denied at " + hexStr(step.step.gpa));
        continue;
      }
      if (verdict.pa->value != step.step.gpa + offset)
        fail(o, cfg.vms[v].id + " pa not gpa + offset at " + hexStr(step.step.gpa));
      spans[v].push_back({window->base + offset, window->endInclusive + offset});
    }
  }
  for (std::size_t a = 0; a < spans.size(); ++a)
    for (std::size_t b = a + 1; b < spans.size(); ++b)
      for (auto [alo, ahi] : spans[a])
        for (auto [blo, bhi] : spans[b])
          if (!(ahi < blo || bhi < alo)) {
            fail(o, "physical intervals of " + cfg.vms[a].id + " and " + cfg.vms[b].id +
                        " overlap");
            goto done;
          }
done:
  if (!report.passed()) fail(o, "generic report flags overlap or non-linearity");
  if (o.pass) o.detail = std::to_string(report.steps.size()) + " steps x " +
                         std::to_string(cfg.vms.size()) + " VMs, disjoint, linear";
  return o;
}

// 5. Pipeline against the independent oracle on random machines.
Outcome oracleEquivalence(double& elapsed) {
  Outcome o;
  auto start = std::chrono::steady_clock::now();
  uint64_t seed = hpmp::testing::harnessSeed();
  std::mt19937_64 rng(seed);
  std::size_t pairs = 0, mismatches = 0, permits = 0, overflow = 0;
  while (pairs < kOraclePairs) {
    hpmp::MachineState state = hpmp::testing::randomMachine(rng, 8);
    for (int i = 0; i < 10; ++i, ++pairs) {
      AccessRequest req = hpmp::testing::randomRequest(rng, state);
      AccessVerdict expected = hpmp::oracleCheck(state, req);
      if (hpmp::checkAccess(state, req) != expected) ++mismatches;
      permits += expected.permitted;
      overflow += expected.reason == hpmp::DenyReason::TranslationOverflow;
    }
  }
  elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (mismatches) fail(o, std::to_string(mismatches) + " mismatches");
  if (elapsed >= kOracleBudget) fail(o, "over time budget");
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu pairs (seed %s), %zu mismatches, %zu permits, %zu overflows",
                pairs, hexStr(seed).c_str(), mismatches, permits, overflow);
  o.detail = buf + (o.pass ? std::string() : "; " + o.detail);
  return o;
}

// 6. Round-robin switches: one write count, HV bits always set.
Outcome switchDeterminism() {
  Outcome o;
  hpmp::Hypervisor hv = hpmp::buildHypervisor(loadFixture("table1.json"));
  uint64_t hvBits = 0;
  for (const auto& row : kTable1)
    if (row.owner == "HV") hvBits |= uint64_t(1) << (2 * row.region + 1);
  std::map<std::size_t, std::size_t> histogram;
  for (std::size_t i = 0; i < kSwitches; ++i) {
    ++histogram[hv.scheduleAndSwitch().writeCount];
    if ((hv.machine().state().hpmp.pmp().enableMask() & hvBits) != hvBits)
      fail(o, "HV bit cleared after switch " + std::to_string(i));
  }
  if (histogram.size() != 1) fail(o, std::to_string(histogram.size()) + " distinct counts");
  if (o.pass)
    o.detail = std::to_string(kSwitches) + " switches, write_count " +
               std::to_string(histogram.begin()->first) + " every time";
  return o;
}

// 7. Access injected after every write of a switch transaction.
Outcome atomicity() {
  Outcome o;
  hpmp::Hypervisor hv = hpmp::buildHypervisor(loadFixture("table1.json"));
  std::size_t points = 0, rejected = 0;
  for (int round = 0; round < 2; ++round) {
    std::size_t next = hpmp::scheduleNext(hpmp::SchedulePolicy::RoundRobin, hv.vms().size(),
                                          *hv.activeIndex());
    std::string vm = hv.vms()[next].vmId();
    hv.switchTo(next, [&](const hpmp::Machine& m, std::size_t) {
      ++points;
      try {
        m.check(vs(vm, AccessKind::Read, 0x2000'0800));
      } catch (const hpmp::AtomicityViolation&) {
        ++rejected;
      }
    });
  }
  if (points == 0 || rejected != points) fail(o, "unguarded injection point");
  o.detail = std::to_string(rejected) + "/" + std::to_string(points) + " injection points rejected";
  return o;
}

// 8. Random hpmpoffset writes never stick to even indices.
Outcome hardwiredZeros() {
  Outcome o;
  std::mt19937_64 rng(hpmp::testing::harnessSeed() + 8);
  hpmp::CsrFile file;
  std::size_t evenWrites = 0;
  for (std::size_t i = 0; i < kOffsetWrites; ++i) {
    unsigned index = unsigned(rng() % hpmp::kNumEntries);
    evenWrites += index % 2 == 0;
    file.write(CsrName::Offset, index, uint32_t(rng()) | 1u);
  }
  for (unsigned i = 0; i < hpmp::kNumEntries; i += 2)
    if (file.read(CsrName::Offset, i) != 0) fail(o, "hpmpoffset" + std::to_string(i) + " != 0");
  if (o.pass)
    o.detail = std::to_string(kOffsetWrites) + " writes (" + std::to_string(evenWrites) +
               " to even indices), all 32 even offsets read 0";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome(double&)> run;
    double budget;
  };
  std::vector<Criterion> criteria{
      {1, "Reference map", [](double&) { return table1Fidelity(); }, kTable1Budget},
      {2, "Permission matrix", [](double&) { return permissionMatrix(); }, 0},
      {3, "Partial update", [](double&) { return partialUpdate(); }, 0},
      {4, "Generic images", [](double&) { return genericImages(); }, 0},
      {5, "Oracle equivalence", oracleEquivalence, 0},
      {6, "Switch determinism", [](double&) { return switchDeterminism(); }, 0},
      {7, "Atomicity", [](double&) { return atomicity(); }, 0},
      {8, "Hardwired zeros", [](double&) { return hardwiredZeros(); }, 0},
  };

  int failures = 0;
  for (auto& c : criteria) {
    double inner = 0;
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(inner);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget > 0 && elapsed >= c.budget) {
      o.pass = false;
      o.detail += "; exceeded " + std::to_string(c.budget) + " s";
    }
    failures += !o.pass;
    std::printf("%s [%d] %-20s %8.3f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, elapsed,
                o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures ? 1 : 0;
}
