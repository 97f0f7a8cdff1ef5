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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hpmp/csr.hpp"
#include "hpmp/hypervisor.hpp"
#include "hpmp/pipeline.hpp"
#include "hpmp/types.hpp"

namespace hpmp
{

  /// Error in a configuration, trace or update document. Carries the
  /// line (1-based, 0 when unknown) and the offending field path.
  class ParseError : public ConfigError
  {
  public:
    ParseError(const std::string& what, std::size_t line = 0, std::string field = {});

    std::size_t line() const
    { return line_; }

    const std::string& field() const
    { return field_; }

  private:
    std::size_t line_;
    std::string field_;
  };

  /// A protection region in byte addresses. Region i of a configuration
  /// occupies hPMP entries 2i (OFF, base) and 2i+1 (TOR, end + 1).
  struct RegionSpec
  {
    std::string name;
    std::string owner;            // "HV" or a VM id.
    uint64_t base = 0;
    uint64_t endInclusive = 0;
    Perms perms;
    bool s = false;

    uint64_t top() const
    { return endInclusive + 1; }

    uint64_t size() const
    { return endInclusive + 1 - base; }

    bool operator==(const RegionSpec&) const = default;
  };

  struct OffsetSpec
  {
    std::size_t region = 0;       // Index into ScenarioConfig::regions.
    uint64_t byteOffset = 0;

    bool operator==(const OffsetSpec&) const = default;
  };

  struct VmSpec
  {
    std::string id;
    /// Guest rules. Absent means a single permissive VS rule (S=1, RWX)
    /// spanning the whole encodable address range.
    std::optional<std::vector<RegionSpec>> vspmp;
    std::vector<OffsetSpec> offsets;

    bool operator==(const VmSpec&) const = default;
  };

  /// Expected outcome of a trace step. Unset fields are not compared.
  struct Expectation
  {
    std::optional<bool> permit;
    std::optional<uint64_t> pa;
    std::optional<Stage> stage;
    std::optional<DenyReason> reason;

    bool matches(const AccessVerdict& verdict) const;

    bool operator==(const Expectation&) const = default;
  };

  struct TraceStep
  {
    enum class Op : uint8_t { Access, Switch };

    uint64_t step = 0;
    Op op = Op::Access;
    PrivilegeMode mode = PrivilegeMode::VS;
    std::string vm;               // Required for VS/VU and switches.
    AccessKind kind = AccessKind::Read;
    unsigned size = 4;
    uint64_t gpa = 0;
    std::optional<Expectation> expect;

    bool operator==(const TraceStep&) const = default;
  };

  struct ScenarioConfig
  {
    std::vector<RegionSpec> regions;
    std::vector<VmSpec> vms;
    std::vector<TraceStep> trace;

    bool operator==(const ScenarioConfig&) const = default;
  };

  /// Maximum number of regions: one OFF-TOR couple per region.
  inline constexpr std::size_t kMaxRegions = kNumEntries / 2;

  /// Parse and validate a JSON configuration document. Integers may be
  /// JSON numbers or strings ("0x2000_0800", "4096"); underscores are
  /// ignored. Throws ParseError.
  ScenarioConfig loadConfig(std::string_view text);

  /// Parse a JSON Lines trace (one step object per line; blank lines and
  /// lines starting with '#' are skipped). Throws ParseError.
  std::vector<TraceStep> loadTrace(std::string_view text);

  /// Parse an update document: a JSON array of
  /// {"csr", "index", "value", "byte"}. With "byte": true the value is a
  /// byte quantity converted to register form: a base for even hpmpaddr,
  /// an inclusive end for odd hpmpaddr, a byte offset for hpmpoffset.
  std::vector<CsrWrite> loadUpdate(std::string_view text);

  /// Read a whole file. Throws ParseError if it cannot be opened.
  std::string readFile(const std::string& path);

  /// Encode the configuration's regions into an hPMP register file
  /// (enable bits left clear).
  CsrFile buildHpmp(const ScenarioConfig& cfg);

  /// Encode a region list into a vSPMP register file with every defined
  /// region enabled.
  VspmpFile buildVspmp(std::span<const RegionSpec> regions);

  /// The default guest file: one S=1 RWX rule over [0, 0x3_FFFF_FFFC).
  VspmpFile permissiveVspmp();

  /// Build the hypervisor with every VM context; the first VM runs.
  Hypervisor buildHypervisor(const ScenarioConfig& cfg);

  /// Result of one trace access.
  struct VerdictRecord
  {
    uint64_t step = 0;
    std::string vm;
    PrivilegeMode mode = PrivilegeMode::VS;
    AccessKind kind = AccessKind::Read;
    unsigned size = 4;
    uint64_t gpa = 0;
    AccessVerdict verdict;
    std::optional<bool> expectMet;
    std::optional<bool> oracleAgrees;
  };

  struct TraceReport
  {
    std::vector<VerdictRecord> records;
    std::size_t permits = 0;
    std::size_t denies = 0;
    std::size_t switches = 0;
    std::size_t mismatches = 0;
    std::size_t oracleMismatches = 0;

    bool passed() const
    { return mismatches == 0 and oracleMismatches == 0; }
  };

  /// Replay a trace. Switch steps run the switch procedure; an access
  /// step naming a VM other than the running one switches to it first.
  /// With `crossCheck`, every access is also evaluated by the oracle.
  /// Throws ConfigError on an unknown VM.
  TraceReport runTrace(const ScenarioConfig& cfg, std::span<const TraceStep> trace,
                       bool crossCheck = false);

  inline TraceReport runTrace(const ScenarioConfig& cfg, bool crossCheck = false)
  { return runTrace(cfg, cfg.trace, crossCheck); }

  /// Evaluate a single access on a hypervisor, switching a copy of it to
  /// the step's VM first when needed.
  AccessVerdict evaluateAs(const Hypervisor& hv, const TraceStep& step);

  struct ProbeOutcome
  {
    TraceStep probe;
    AccessVerdict before;
    AccessVerdict after;
    std::optional<bool> expectMet;   // Expectation applies to `after`.
  };

  /// Probes at region corners (base, base + size/2, end - 3) of every
  /// region, for every VM in VS mode and every access kind.
  std::vector<TraceStep> defaultProbes(const ScenarioConfig& cfg);

  /// Apply hPMP writes as one hypervisor transaction and report each
  /// probe's verdict before and after.
  std::vector<ProbeOutcome> runPartialUpdate(const ScenarioConfig& cfg,
                                             std::span<const CsrWrite> update,
                                             std::span<const TraceStep> probes);

  /// A translated physical interval [lo, hi] of one VM region (or an HV
  /// region, which is never translated).
  struct PhysicalInterval
  {
    std::string owner;
    std::string region;
    uint64_t lo = 0;
    uint64_t hi = 0;
  };

  struct GenericStep
  {
    TraceStep step;
    std::vector<AccessVerdict> perVm;   // Indexed like ScenarioConfig::vms.
  };

  struct GenericReport
  {
    std::vector<std::string> vmIds;
    std::vector<GenericStep> steps;
    std::vector<PhysicalInterval> intervals;
    /// Pairs of intervals of different owners that overlap.
    std::vector<std::pair<std::size_t, std::size_t>> overlaps;
    /// Steps whose PA differs from GPA + the hit region's configured offset.
    std::vector<std::string> linearityViolations;

    bool disjoint() const
    { return overlaps.empty(); }

    bool passed() const
    { return overlaps.empty() and linearityViolations.empty(); }
  };

  /// Verify that all VMs declare identical sets of GPA windows. Throws
  /// ConfigError otherwise.
  void requireIdenticalWindows(const ScenarioConfig& cfg);

  /// Replay the same GPA trace under each VM (switching between them),
  /// collect the PA traces, and check that translated physical intervals
  /// of different owners are disjoint. Uses the configuration's trace, or
  /// corner probes of the first VM's windows when it has none.
  GenericReport runGenericImages(const ScenarioConfig& cfg,
                                 std::span<const TraceStep> trace);

  inline GenericReport runGenericImages(const ScenarioConfig& cfg)
  { return runGenericImages(cfg, cfg.trace); }

  /// Round-robin switch distribution over `iterations` switches.
  struct SwitchBench
  {
    std::size_t iterations = 0;
    std::vector<std::size_t> writeCounts;
    bool hvBitsPreserved = true;

    double mean() const;
    double variance() const;
  };

  SwitchBench runSwitchBench(const ScenarioConfig& cfg, std::size_t iterations);

}
