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

#include "hpmp/hypervisor.hpp"

#include <bit>
#include <set>
#include <stdexcept>

namespace hpmp
{

  namespace
  {
    constexpr uint64_t kOddBits = 0xAAAA'AAAA'AAAA'AAAAull;

    /// Writes shared by the initial load and every switch: clear `clear`
    /// from the enable bitmap, program offsets, set next's bits, install
    /// the vSPMP file.
    SwitchTransaction
    buildLoad(const MachineState& state, uint64_t clear, const VmContext& next)
    {
      SwitchTransaction txn;
      auto& writes = txn.writes;
      uint64_t enabled = state.hpmp.pmp().enableMask();

      uint64_t cleared = enabled & ~clear;
      writes.push_back({CsrWrite::Bank::Hpmp, CsrName::Switch, 0, uint32_t(cleared)});
      writes.push_back({CsrWrite::Bank::Hpmp, CsrName::Switch, 1, uint32_t(cleared >> 32)});

      for (auto [entry, value] : next.offsetImage())
        writes.push_back({CsrWrite::Bank::Hpmp, CsrName::Offset, entry, value});

      uint64_t loaded = cleared | next.switchMask();
      writes.push_back({CsrWrite::Bank::Hpmp, CsrName::Switch, 0, uint32_t(loaded)});
      writes.push_back({CsrWrite::Bank::Hpmp, CsrName::Switch, 1, uint32_t(loaded >> 32)});

      const VspmpFile& image = next.vspmpImage();
      for (auto name : {CsrName::Addr, CsrName::Cfg, CsrName::Switch})
        for (unsigned i = 0; i < csrCount(name); ++i)
          writes.push_back({CsrWrite::Bank::Vspmp, name, i, image.read(name, i)});
      return txn;
    }

    void
    applyWrites(Machine& machine, SwitchTransaction& txn, const WriteObserver& observer)
    {
      txn.open = true;
      std::size_t applied = 0;
      for (const auto& write : txn.writes)
        {
          machine.apply(write);
          ++applied;
          if (observer)
            observer(machine, applied);
        }
    }
  }


  VmContext::VmContext(std::string vmId, VspmpFile vspmp, uint64_t switchMask,
                       std::map<unsigned, uint32_t> offsetImage, uint64_t cpuState)
    : vmId_(std::move(vmId)), vspmp_(std::move(vspmp)), switchMask_(switchMask),
      offsets_(std::move(offsetImage)), cpuState_(cpuState)
  {
    if (vmId_.empty())
      throw ConfigError("VM id must not be empty");
    if (switchMask_ & ~kOddBits)
      throw ConfigError("VM " + vmId_ + ": switch mask may only name odd entries");
    for (auto [entry, value] : offsets_)
      {
        if (entry >= kNumEntries or entry % 2 == 0)
          throw ConfigError("VM " + vmId_ + ": offset for entry " + std::to_string(entry) +
                            " (only odd entries carry offsets)");
      }
  }


  void
  VmContext::setOffset(unsigned entry, uint32_t value)
  {
    if (entry >= kNumEntries or entry % 2 == 0)
      throw ConfigError("offset for entry " + std::to_string(entry) +
                        " (only odd entries carry offsets)");
    offsets_[entry] = value;
  }


  AccessVerdict
  Machine::check(const AccessRequest& req) const
  {
    if (open_)
      throw AtomicityViolation("access evaluated while a switch transaction is open");
    return checkAccess(state_, req);
  }


  void
  Machine::begin()
  {
    if (open_)
      throw std::logic_error("transaction already open");
    open_ = true;
  }


  void
  Machine::requireOpen(const char* what) const
  {
    if (not open_)
      throw std::logic_error(std::string(what) + " outside a transaction");
  }


  void
  Machine::apply(const CsrWrite& write)
  {
    requireOpen("register write");
    if (write.bank == CsrWrite::Bank::Hpmp)
      state_.hpmp.write(write.name, write.index, write.value);
    else
      state_.vspmp.write(write.name, write.index, write.value);
  }


  void
  Machine::loadCpuState(uint64_t token, PrivilegeContext ctx)
  {
    requireOpen("CPU state load");
    state_.cpuState = token;
    state_.ctx = std::move(ctx);
  }


  void
  Machine::commit()
  {
    requireOpen("commit");
    open_ = false;
  }


  void
  execute(Machine& machine, SwitchTransaction& txn, const WriteObserver& observer)
  {
    machine.begin();
    applyWrites(machine, txn, observer);
    machine.commit();
    txn.open = false;
  }


  SwitchTransaction
  buildSwitch(const MachineState& state, const VmContext& current, const VmContext& next)
  {
    return buildLoad(state, current.switchMask(), next);
  }


  SwitchMetrics
  vmSwitch(Machine& machine, VmContext& current, const VmContext& next,
           const WriteObserver& observer)
  {
    if (machine.transactionOpen())
      throw std::logic_error("switch requested while a transaction is open");
    const auto& running = machine.state().ctx.vmId;
    if (not running or *running != current.vmId())
      throw std::logic_error("VM " + current.vmId() + " is not the running VM");

    // Save.
    current.save(machine.state().vspmp, machine.state().cpuState);

    // Load, as one critical section.
    SwitchTransaction txn = buildSwitch(machine.state(), current, next);
    machine.begin();
    applyWrites(machine, txn, observer);
    machine.loadCpuState(next.cpuState(),
                         PrivilegeContext::make(PrivilegeMode::VS, next.vmId()));
    machine.commit();
    txn.open = false;

    SwitchMetrics metrics;
    metrics.writeCount = txn.writes.size();
    metrics.entriesDisabled = unsigned(std::popcount(current.switchMask()));
    metrics.entriesEnabled = unsigned(std::popcount(next.switchMask()));
    return metrics;
  }


  std::size_t
  scheduleNext(SchedulePolicy policy, std::size_t vmCount, std::size_t current)
  {
    if (vmCount == 0)
      throw ConfigError("no VMs to schedule");
    switch (policy)
      {
      case SchedulePolicy::RoundRobin:
        return (current + 1) % vmCount;
      }
    return 0;
  }


  uint64_t
  hypervisorMask(const CsrFile& hpmp)
  {
    uint64_t mask = 0;
    for (const auto& region : decodeRegions(hpmp))
      if (region.s)
        mask |= uint64_t(1) << region.entryIndex;
    return mask;
  }


  void
  validateContext(const CsrFile& hpmp, const VmContext& vm)
  {
    uint64_t vmRegions = 0;
    for (const auto& region : decodeRegions(hpmp))
      if (not region.s)
        vmRegions |= uint64_t(1) << region.entryIndex;

    uint64_t stray = vm.switchMask() & ~vmRegions;
    if (stray)
      throw ConfigError("VM " + vm.vmId() + ": switch mask covers entry " +
                        std::to_string(std::countr_zero(stray)) +
                        " which is not an S=0 TOR region");
    for (auto [entry, value] : vm.offsetImage())
      if (((vm.switchMask() >> entry) & 1) == 0)
        throw ConfigError("VM " + vm.vmId() + ": offset for entry " + std::to_string(entry) +
                          " which the VM does not own");
  }


  Hypervisor::Hypervisor(CsrFile hpmp, std::vector<VmContext> vms)
    : vms_(std::move(vms))
  {
    std::set<std::string> ids;
    for (const auto& vm : vms_)
      {
        validateContext(hpmp, vm);
        if (not ids.insert(vm.vmId()).second)
          throw ConfigError("duplicate VM id " + vm.vmId());
      }
    for (std::size_t i = 0; i < vms_.size(); ++i)
      for (std::size_t j = i + 1; j < vms_.size(); ++j)
        if (vms_[i].switchMask() & vms_[j].switchMask())
          throw ConfigError("VMs " + vms_[i].vmId() + " and " + vms_[j].vmId() +
                            " share hPMP entries");

    // Only the hypervisor's own regions start enabled.
    uint64_t hv = hypervisorMask(hpmp);
    hpmp.write(CsrName::Switch, 0, uint32_t(hv));
    hpmp.write(CsrName::Switch, 1, uint32_t(hv >> 32));

    MachineState state;
    state.hpmp = std::move(hpmp);
    state.ctx = PrivilegeContext::make(PrivilegeMode::HS);
    machine_ = Machine(std::move(state));

    if (vms_.empty())
      return;

    const VmContext& first = vms_.front();
    SwitchTransaction txn = buildLoad(machine_.state(), 0, first);
    machine_.begin();
    applyWrites(machine_, txn, {});
    machine_.loadCpuState(first.cpuState(),
                          PrivilegeContext::make(PrivilegeMode::VS, first.vmId()));
    machine_.commit();
    txn.open = false;
    active_ = 0;
  }


  std::size_t
  Hypervisor::indexOf(const std::string& vmId) const
  {
    for (std::size_t i = 0; i < vms_.size(); ++i)
      if (vms_[i].vmId() == vmId)
        return i;
    throw ConfigError("unknown VM '" + vmId + "'");
  }


  SwitchMetrics
  Hypervisor::switchTo(std::size_t next, const WriteObserver& observer)
  {
    if (not active_)
      throw ConfigError("no VM is running");
    if (next >= vms_.size())
      throw ConfigError("VM index " + std::to_string(next) + " out of range");
    // For a self-switch both references name the same context; the save
    // happens before the load reads it.
    SwitchMetrics metrics = vmSwitch(machine_, vms_[*active_], vms_[next], observer);
    active_ = next;
    return metrics;
  }


  SwitchMetrics
  Hypervisor::scheduleAndSwitch(SchedulePolicy policy)
  {
    if (not active_)
      throw ConfigError("no VM is running");
    return switchTo(scheduleNext(policy, vms_.size(), *active_));
  }


  void
  Hypervisor::applyUpdate(std::span<const CsrWrite> writes, const WriteObserver& observer)
  {
    SwitchTransaction txn;
    for (const auto& write : writes)
      {
        if (write.bank != CsrWrite::Bank::Hpmp)
          throw ConfigError("updates may only target hPMP registers");
        if (write.index >= csrCount(write.name))
          throw ConfigError(std::string(toString(write.name)) + std::to_string(write.index) +
                            " does not exist");
        txn.writes.push_back(write);
      }
    execute(machine_, txn, observer);

    for (const auto& write : writes)
      {
        if (write.name != CsrName::Offset or write.index % 2 == 0)
          continue;
        for (auto& vm : vms_)
          if ((vm.switchMask() >> write.index) & 1)
            vm.setOffset(write.index, write.value);
      }
  }

}
