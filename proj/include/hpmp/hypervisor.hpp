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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hpmp/csr.hpp"
#include "hpmp/pipeline.hpp"
#include "hpmp/types.hpp"

namespace hpmp
{

  /// One register write of a hypervisor transaction.
  struct CsrWrite
  {
    enum class Bank : uint8_t { Hpmp, Vspmp };

    Bank bank = Bank::Hpmp;
    CsrName name = CsrName::Addr;
    unsigned index = 0;
    uint32_t value = 0;

    bool operator==(const CsrWrite&) const = default;
  };

  /// Ordered register writes applied as one critical section.
  struct SwitchTransaction
  {
    std::vector<CsrWrite> writes;
    bool open = false;
  };

  struct SwitchMetrics
  {
    std::size_t writeCount = 0;
    unsigned entriesDisabled = 0;
    unsigned entriesEnabled = 0;

    bool operator==(const SwitchMetrics&) const = default;
  };

  /// Saved state of one VM: its vSPMP registers, the hPMP entries it owns
  /// (enable bits of odd entries), the offsets programmed into those
  /// entries while it runs, and an opaque CPU-state token.
  class VmContext
  {
  public:

    /// Throws ConfigError if the switch mask has even bits set or the
    /// offset image names an even or out-of-range entry.
    VmContext(std::string vmId, VspmpFile vspmp, uint64_t switchMask,
              std::map<unsigned, uint32_t> offsetImage = {}, uint64_t cpuState = 0);

    const std::string& vmId() const
    { return vmId_; }

    const VspmpFile& vspmpImage() const
    { return vspmp_; }

    uint64_t switchMask() const
    { return switchMask_; }

    const std::map<unsigned, uint32_t>& offsetImage() const
    { return offsets_; }

    uint64_t cpuState() const
    { return cpuState_; }

    void save(const VspmpFile& vspmp, uint64_t cpuState)
    { vspmp_ = vspmp; cpuState_ = cpuState; }

    /// Record an offset for an owned entry so it survives later switches.
    void setOffset(unsigned entry, uint32_t value);

    bool operator==(const VmContext&) const = default;

  private:

    std::string vmId_;
    VspmpFile vspmp_;
    uint64_t switchMask_ = 0;
    std::map<unsigned, uint32_t> offsets_;
    uint64_t cpuState_ = 0;
  };

  /// Machine state behind a transaction gate. Accesses may only be
  /// evaluated while no transaction is open.
  class Machine
  {
  public:

    explicit Machine(MachineState state = {})
      : state_(std::move(state))
    { }

    /// Throws AtomicityViolation while a transaction is open.
    AccessVerdict check(const AccessRequest& req) const;

    const MachineState& state() const
    { return state_; }

    bool transactionOpen() const
    { return open_; }

    /// Open the critical section. Throws std::logic_error if already open.
    void begin();

    /// Apply one write inside the open transaction.
    void apply(const CsrWrite& write);

    /// Restore the CPU-state token and privilege context of the next VM.
    void loadCpuState(uint64_t token, PrivilegeContext ctx);

    /// Close the critical section.
    void commit();

  private:

    void requireOpen(const char* what) const;

    MachineState state_;
    bool open_ = false;
  };

  /// Called after each write of a transaction with the number of writes
  /// applied so far. Used to inject accesses mid-switch.
  using WriteObserver = std::function<void(const Machine&, std::size_t applied)>;

  /// Run a transaction on the machine: open, apply every write in order,
  /// commit. The transaction object reflects the gate while it runs.
  void execute(Machine& machine, SwitchTransaction& txn,
               const WriteObserver& observer = {});

  /// Build the load phase of a switch: clear the current VM's enable bits,
  /// program the next VM's offsets, set the next VM's enable bits and
  /// install its full vSPMP file. The write count depends only on the
  /// size of the next VM's offset image.
  SwitchTransaction buildSwitch(const MachineState& state, const VmContext& current,
                                const VmContext& next);

  /// Switch from `current` to `next`: save the running VM into `current`,
  /// then run the load transaction and restore `next`'s CPU state.
  /// Throws std::logic_error if `current` is not the running VM or a
  /// transaction is already open.
  SwitchMetrics vmSwitch(Machine& machine, VmContext& current, const VmContext& next,
                         const WriteObserver& observer = {});

  enum class SchedulePolicy : uint8_t { RoundRobin };

  /// Index of the VM to run after `current`. Throws ConfigError when
  /// there are no VMs.
  std::size_t scheduleNext(SchedulePolicy policy, std::size_t vmCount,
                           std::size_t current);

  /// Enable bits of all S=1 (hypervisor) TOR regions of the hPMP.
  uint64_t hypervisorMask(const CsrFile& hpmp);

  /// Check a context against the hPMP programming: every masked entry
  /// must be an S=0 TOR region and every offset must target a masked
  /// entry. Throws ConfigError.
  void validateContext(const CsrFile& hpmp, const VmContext& vm);

  /// A machine with its VM contexts. Owns the switch procedure and
  /// tracks which VM is running.
  class Hypervisor
  {
  public:

    /// Programs the initial VM (index 0) into the machine if any VMs are
    /// given; the hPMP enable bits of S=1 regions are set permanently.
    Hypervisor(CsrFile hpmp, std::vector<VmContext> vms);

    const Machine& machine() const
    { return machine_; }

    const std::vector<VmContext>& vms() const
    { return vms_; }

    std::optional<std::size_t> activeIndex() const
    { return active_; }

    std::size_t indexOf(const std::string& vmId) const;

    /// Switch to the given VM. Switching to the running VM performs a full
    /// switch as well.
    SwitchMetrics switchTo(std::size_t next, const WriteObserver& observer = {});

    /// Switch to the next VM chosen by the policy.
    SwitchMetrics scheduleAndSwitch(SchedulePolicy policy = SchedulePolicy::RoundRobin);

    /// Apply hPMP writes as one transaction. Offset writes to an entry
    /// owned by a VM are also recorded in that VM's context.
    void applyUpdate(std::span<const CsrWrite> writes,
                     const WriteObserver& observer = {});

    AccessVerdict check(const AccessRequest& req) const
    { return machine_.check(req); }

  private:

    Machine machine_;
    std::vector<VmContext> vms_;
    std::optional<std::size_t> active_;
  };

}
