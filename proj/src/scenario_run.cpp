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

#include "hpmp/scenario.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "hpmp/oracle.hpp"

namespace hpmp
{

  namespace
  {
    AccessRequest
    requestFor(const TraceStep& step)
    {
      std::optional<std::string> vm;
      if (step.mode == PrivilegeMode::VS or step.mode == PrivilegeMode::VU)
        vm = step.vm;
      return AccessRequest::make(step.gpa, step.size, step.kind,
                                 PrivilegeContext::make(step.mode, vm));
    }

    bool
    needsSwitch(const Hypervisor& hv, const TraceStep& step)
    {
      if (step.mode != PrivilegeMode::VS and step.mode != PrivilegeMode::VU)
        return false;
      auto active = hv.activeIndex();
      return not active or hv.vms()[*active].vmId() != step.vm;
    }

    uint64_t
    offsetFor(const ScenarioConfig& cfg, std::size_t vm, std::size_t region)
    {
      for (const auto& offset : cfg.vms[vm].offsets)
        if (offset.region == region)
          return offset.byteOffset;
      return 0;
    }

    std::vector<std::pair<uint64_t, uint64_t>>
    windowsOf(const ScenarioConfig& cfg, const std::string& vm)
    {
      std::vector<std::pair<uint64_t, uint64_t>> windows;
      for (const auto& region : cfg.regions)
        if (region.owner == vm)
          windows.emplace_back(region.base, region.endInclusive);
      std::sort(windows.begin(), windows.end());
      return windows;
    }

    std::vector<uint64_t>
    corners(const RegionSpec& region)
    {
      uint64_t mid = (region.base + region.size() / 2) & ~uint64_t(3);
      std::set<uint64_t> points{region.base, mid, region.endInclusive - 3};
      return {points.begin(), points.end()};
    }
  }


  TraceReport
  runTrace(const ScenarioConfig& cfg, std::span<const TraceStep> trace, bool crossCheck)
  {
    Hypervisor hv = buildHypervisor(cfg);
    TraceReport report;

    for (const auto& step : trace)
      {
        if (step.op == TraceStep::Op::Switch)
          {
            hv.switchTo(hv.indexOf(step.vm));
            ++report.switches;
            continue;
          }
        if (needsSwitch(hv, step))
          {
            hv.switchTo(hv.indexOf(step.vm));
            ++report.switches;
          }

        AccessRequest req = requestFor(step);
        VerdictRecord record;
        record.step = step.step;
        record.vm = step.vm;
        record.mode = step.mode;
        record.kind = step.kind;
        record.size = step.size;
        record.gpa = step.gpa;
        record.verdict = hv.check(req);

        if (step.expect)
          {
            record.expectMet = step.expect->matches(record.verdict);
            if (not *record.expectMet)
              ++report.mismatches;
          }
        if (crossCheck)
          {
            record.oracleAgrees = oracleCheck(hv.machine().state(), req) == record.verdict;
            if (not *record.oracleAgrees)
              ++report.oracleMismatches;
          }
        if (record.verdict.permitted)
          ++report.permits;
        else
          ++report.denies;
        report.records.push_back(std::move(record));
      }
    return report;
  }


  AccessVerdict
  evaluateAs(const Hypervisor& hv, const TraceStep& step)
  {
    AccessRequest req = requestFor(step);
    if (not needsSwitch(hv, step))
      return hv.check(req);
    Hypervisor scratch = hv;
    scratch.switchTo(scratch.indexOf(step.vm));
    return scratch.check(req);
  }


  std::vector<TraceStep>
  defaultProbes(const ScenarioConfig& cfg)
  {
    std::vector<TraceStep> probes;
    for (const auto& vm : cfg.vms)
      for (const auto& region : cfg.regions)
        for (uint64_t gpa : corners(region))
          for (auto kind : {AccessKind::Read, AccessKind::Write, AccessKind::Execute})
            {
              TraceStep probe;
              probe.step = probes.size() + 1;
              probe.mode = PrivilegeMode::VS;
              probe.vm = vm.id;
              probe.kind = kind;
              probe.size = 4;
              probe.gpa = gpa;
              probes.push_back(std::move(probe));
            }
    return probes;
  }


  std::vector<ProbeOutcome>
  runPartialUpdate(const ScenarioConfig& cfg, std::span<const CsrWrite> update,
                   std::span<const TraceStep> probes)
  {
    Hypervisor hv = buildHypervisor(cfg);
    std::vector<ProbeOutcome> outcomes;
    for (const auto& probe : probes)
      outcomes.push_back({probe, evaluateAs(hv, probe), {}, std::nullopt});

    hv.applyUpdate(update);

    for (auto& outcome : outcomes)
      {
        outcome.after = evaluateAs(hv, outcome.probe);
        if (outcome.probe.expect)
          outcome.expectMet = outcome.probe.expect->matches(outcome.after);
      }
    return outcomes;
  }


  void
  requireIdenticalWindows(const ScenarioConfig& cfg)
  {
    if (cfg.vms.empty())
      return;
    auto reference = windowsOf(cfg, cfg.vms.front().id);
    for (const auto& vm : cfg.vms)
      if (windowsOf(cfg, vm.id) != reference)
        throw ConfigError("generic images: VM " + vm.id +
                          " does not declare the same GPA windows as " + cfg.vms.front().id);
  }


  GenericReport
  runGenericImages(const ScenarioConfig& cfg, std::span<const TraceStep> trace)
  {
    requireIdenticalWindows(cfg);
    GenericReport report;

    std::vector<TraceStep> steps;
    for (const auto& step : trace)
      if (step.op == TraceStep::Op::Access)
        steps.push_back(step);
    if (steps.empty() and not cfg.vms.empty())
      {
        for (const auto& region : cfg.regions)
          {
            if (region.owner != cfg.vms.front().id)
              continue;
            for (uint64_t gpa : corners(region))
              {
                TraceStep step;
                step.step = steps.size() + 1;
                step.kind = region.perms.x and not region.perms.w
                  ? AccessKind::Execute : AccessKind::Read;
                step.gpa = gpa;
                steps.push_back(step);
              }
          }
      }
    for (auto& step : steps)
      if (step.mode != PrivilegeMode::VU)
        step.mode = PrivilegeMode::VS;

    for (const auto& step : steps)
      report.steps.push_back({step, std::vector<AccessVerdict>(cfg.vms.size())});

    if (not cfg.vms.empty())
      {
        Hypervisor hv = buildHypervisor(cfg);
        for (std::size_t v = 0; v < cfg.vms.size(); ++v)
          {
            report.vmIds.push_back(cfg.vms[v].id);
            hv.switchTo(v);
            for (auto& entry : report.steps)
              {
                TraceStep step = entry.step;
                step.vm = cfg.vms[v].id;
                AccessVerdict verdict = hv.check(requestFor(step));
                entry.perVm[v] = verdict;

                if (verdict.permitted)
                  {
                    std::size_t region = *verdict.hpmpEntry / 2;
                    uint64_t expected = step.gpa + offsetFor(cfg, v, region);
                    if (verdict.pa->value != expected)
                      report.linearityViolations.push_back(
                        "step " + std::to_string(step.step) + " under " + step.vm + ": pa " +
                        hex(verdict.pa->value) + " != gpa + offset " + hex(expected));
                  }
              }
          }
      }

    for (std::size_t k = 0; k < cfg.regions.size(); ++k)
      {
        const RegionSpec& region = cfg.regions[k];
        uint64_t shift = 0;
        for (std::size_t v = 0; v < cfg.vms.size(); ++v)
          if (cfg.vms[v].id == region.owner)
            shift = offsetFor(cfg, v, k);
        report.intervals.push_back({region.owner, region.name, region.base + shift,
                                    region.endInclusive + shift});
      }
    for (std::size_t i = 0; i < report.intervals.size(); ++i)
      for (std::size_t j = i + 1; j < report.intervals.size(); ++j)
        {
          const auto& a = report.intervals[i];
          const auto& b = report.intervals[j];
          if (a.owner != b.owner and a.lo <= b.hi and b.lo <= a.hi)
            report.overlaps.emplace_back(i, j);
        }
    return report;
  }


  double
  SwitchBench::mean() const
  {
    if (writeCounts.empty())
      return 0;
    double sum = 0;
    for (auto count : writeCounts)
      sum += double(count);
    return sum / double(writeCounts.size());
  }


  double
  SwitchBench::variance() const
  {
    if (writeCounts.empty())
      return 0;
    double m = mean();
    double sum = 0;
    for (auto count : writeCounts)
      sum += (double(count) - m) * (double(count) - m);
    return sum / double(writeCounts.size());
  }


  SwitchBench
  runSwitchBench(const ScenarioConfig& cfg, std::size_t iterations)
  {
    Hypervisor hv = buildHypervisor(cfg);
    if (hv.vms().empty())
      throw ConfigError("switch-bench needs at least one VM");
    uint64_t hvMask = hypervisorMask(hv.machine().state().hpmp);

    SwitchBench bench;
    bench.iterations = iterations;
    for (std::size_t i = 0; i < iterations; ++i)
      {
        SwitchMetrics metrics = hv.scheduleAndSwitch(SchedulePolicy::RoundRobin);
        bench.writeCounts.push_back(metrics.writeCount);
        if ((hv.machine().state().hpmp.pmp().enableMask() & hvMask) != hvMask)
          bench.hvBitsPreserved = false;
      }
    return bench;
  }

}
