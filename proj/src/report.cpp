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

#include "hpmp/report.hpp"

#include <map>

#include "json.hpp"

namespace hpmp
{

  using ordered = nlohmann::ordered_json;

  namespace
  {
    ordered
    verdictJson(const AccessVerdict& verdict)
    {
      ordered out;
      out["decision"] = verdict.permitted ? "permit" : "deny";
      out["stage"] = verdict.stage ? ordered(toString(*verdict.stage)) : ordered(nullptr);
      out["reason"] = verdict.reason ? ordered(toString(*verdict.reason)) : ordered(nullptr);
      out["pa"] = verdict.pa ? ordered(hex(verdict.pa->value)) : ordered(nullptr);
      ordered entries;
      entries["vspmp"] = verdict.vspmpEntry ? ordered(*verdict.vspmpEntry) : ordered(nullptr);
      entries["hpmp"] = verdict.hpmpEntry ? ordered(*verdict.hpmpEntry) : ordered(nullptr);
      out["matched_entry"] = entries;
      return out;
    }
  }


  std::string
  verdictLine(const VerdictRecord& record)
  {
    ordered out;
    out["type"] = "verdict";
    out["step"] = record.step;
    out["vm"] = record.vm.empty() ? ordered(nullptr) : ordered(record.vm);
    out["mode"] = toString(record.mode);
    out["kind"] = toString(record.kind);
    out["size"] = record.size;
    out["gpa"] = hex(record.gpa);
    ordered verdict = verdictJson(record.verdict);
    for (auto& [key, value] : verdict.items())
      out[key] = value;
    if (record.expectMet)
      out["expect_met"] = *record.expectMet;
    if (record.oracleAgrees)
      out["oracle_agrees"] = *record.oracleAgrees;
    return out.dump();
  }


  std::string
  summaryLine(const TraceReport& report)
  {
    ordered out;
    out["type"] = "summary";
    out["steps"] = report.records.size();
    out["permits"] = report.permits;
    out["denies"] = report.denies;
    out["switches"] = report.switches;
    out["mismatches"] = report.mismatches;
    out["oracle_mismatches"] = report.oracleMismatches;
    out["passed"] = report.passed();
    return out.dump();
  }


  std::vector<std::string>
  traceLines(const TraceReport& report)
  {
    std::vector<std::string> lines;
    for (const auto& record : report.records)
      lines.push_back(verdictLine(record));
    lines.push_back(summaryLine(report));
    return lines;
  }


  std::vector<std::string>
  dumpLines(const ScenarioConfig& cfg, const Hypervisor& hv)
  {
    const CsrFile& file = hv.machine().state().hpmp;
    std::vector<std::string> lines;
    for (std::size_t k = 0; k < cfg.regions.size(); ++k)
      {
        const RegionSpec& spec = cfg.regions[k];
        unsigned odd = unsigned(2 * k + 1);
        uint64_t start = uint64_t(file.read(CsrName::Addr, odd - 1)) << 2;
        uint64_t top = uint64_t(file.read(CsrName::Addr, odd)) << 2;
        EntryCfg cfgA = file.pmp().entryCfg(odd - 1);
        EntryCfg cfgB = file.pmp().entryCfg(odd);

        ordered out;
        out["type"] = "region";
        out["region"] = k;
        out["name"] = spec.name;
        out["owner"] = spec.owner;
        out["base"] = hex(start);
        out["end_inclusive"] = hex(top - 1);
        out["perms"] = cfgB.perms.toString();
        out["s"] = cfgB.s;
        out["size_bytes"] = top - start;
        out["entry_a"] = odd - 1;
        out["entry_b"] = odd;
        out["hpmpaddr_a"] = hex(file.read(CsrName::Addr, odd - 1));
        out["hpmpaddr_b"] = hex(file.read(CsrName::Addr, odd));
        out["cfg_a"] = cfgA.toString();
        out["cfg_b"] = cfgB.toString();
        out["cfg_b_raw"] = hex(cfgB.encode());
        out["hpmpoffset_b"] = hex(file.read(CsrName::Offset, odd));
        out["enabled"] = bool((file.pmp().enableMask() >> odd) & 1);
        lines.push_back(out.dump());
      }
    for (const auto& vm : hv.vms())
      {
        ordered out;
        out["type"] = "vm";
        out["vm_id"] = vm.vmId();
        out["switch_mask"] = hex(vm.switchMask());
        ordered offsets = ordered::object();
        for (auto [entry, value] : vm.offsetImage())
          offsets[std::to_string(entry)] = hex(uint64_t(value) << 2);
        out["byte_offsets"] = offsets;
        lines.push_back(out.dump());
      }
    return lines;
  }


  std::vector<std::string>
  updateLines(const std::vector<ProbeOutcome>& outcomes)
  {
    std::vector<std::string> lines;
    std::size_t changed = 0, mismatches = 0;
    for (const auto& outcome : outcomes)
      {
        ordered out;
        out["type"] = "probe";
        out["step"] = outcome.probe.step;
        out["vm"] = outcome.probe.vm;
        out["mode"] = toString(outcome.probe.mode);
        out["kind"] = toString(outcome.probe.kind);
        out["gpa"] = hex(outcome.probe.gpa);
        out["before"] = verdictJson(outcome.before);
        out["after"] = verdictJson(outcome.after);
        if (outcome.expectMet)
          {
            out["expect_met"] = *outcome.expectMet;
            if (not *outcome.expectMet)
              ++mismatches;
          }
        if (not (outcome.before == outcome.after))
          ++changed;
        lines.push_back(out.dump());
      }
    ordered summary;
    summary["type"] = "summary";
    summary["probes"] = outcomes.size();
    summary["changed"] = changed;
    summary["mismatches"] = mismatches;
    summary["passed"] = mismatches == 0;
    lines.push_back(summary.dump());
    return lines;
  }


  std::vector<std::string>
  genericLines(const GenericReport& report)
  {
    std::vector<std::string> lines;
    for (const auto& entry : report.steps)
      {
        ordered out;
        out["type"] = "generic_step";
        out["step"] = entry.step.step;
        out["kind"] = toString(entry.step.kind);
        out["gpa"] = hex(entry.step.gpa);
        ordered pas = ordered::object();
        for (std::size_t v = 0; v < report.vmIds.size(); ++v)
          {
            const auto& verdict = entry.perVm[v];
            pas[report.vmIds[v]] = verdict.pa ? ordered(hex(verdict.pa->value))
                                              : ordered(nullptr);
          }
        out["pa"] = pas;
        lines.push_back(out.dump());
      }
    for (const auto& interval : report.intervals)
      {
        ordered out;
        out["type"] = "interval";
        out["owner"] = interval.owner;
        out["region"] = interval.region;
        out["pa_lo"] = hex(interval.lo);
        out["pa_hi"] = hex(interval.hi);
        lines.push_back(out.dump());
      }
    ordered summary;
    summary["type"] = "summary";
    summary["vms"] = report.vmIds;
    summary["steps"] = report.steps.size();
    summary["disjoint"] = report.disjoint();
    ordered overlaps = ordered::array();
    for (auto [i, j] : report.overlaps)
      overlaps.push_back({report.intervals[i].region + " (" + report.intervals[i].owner + ")",
                          report.intervals[j].region + " (" + report.intervals[j].owner + ")"});
    summary["overlaps"] = overlaps;
    summary["linearity_violations"] = report.linearityViolations;
    summary["passed"] = report.passed();
    lines.push_back(summary.dump());
    return lines;
  }


  std::string
  benchLine(const SwitchBench& bench)
  {
    std::map<std::size_t, std::size_t> histogram;
    for (auto count : bench.writeCounts)
      ++histogram[count];
    ordered hist = ordered::object();
    for (auto [count, times] : histogram)
      hist[std::to_string(count)] = times;

    ordered out;
    out["type"] = "switch_bench";
    out["iterations"] = bench.iterations;
    out["write_count_histogram"] = hist;
    out["write_count_mean"] = bench.mean();
    out["write_count_variance"] = bench.variance();
    out["hv_bits_preserved"] = bench.hvBitsPreserved;
    out["passed"] = bench.variance() == 0.0 and bench.hvBitsPreserved;
    return out.dump();
  }

}
