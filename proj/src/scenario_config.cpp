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
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hpmp
{

  using nlohmann::json;

  namespace
  {
    constexpr uint64_t kMaxEncodableTop = uint64_t(0xffff'ffff) << 2;

    std::size_t
    lineOf(std::string_view text, std::size_t byte)
    {
      byte = std::min(byte, text.size());
      return 1 + std::count(text.begin(), text.begin() + byte, '\n');
    }

    json
    parseJson(std::string_view text, std::size_t lineBase = 0)
    {
      try
        {
          return json::parse(text.begin(), text.end());
        }
      catch (const json::parse_error& e)
        {
          std::size_t line = lineBase ? lineBase : lineOf(text, e.byte ? e.byte - 1 : 0);
          throw ParseError(std::string("malformed JSON: ") + e.what(), line);
        }
    }

    /// Field access with path-qualified errors.
    class Fields
    {
    public:
      Fields(const json& obj, std::string path, std::size_t line = 0)
        : obj_(obj), path_(std::move(path)), line_(line)
      {
        if (not obj_.is_object())
          fail(path_, "expected an object");
      }

      [[noreturn]] void
      fail(const std::string& field, const std::string& what) const
      {
        throw ParseError(field + ": " + what, line_, field);
      }

      std::string
      at(const char* key) const
      { return path_ + "." + key; }

      bool
      has(const char* key) const
      { return obj_.contains(key) and not obj_[key].is_null(); }

      const json&
      raw(const char* key) const
      {
        if (not has(key))
          fail(at(key), "missing required field");
        return obj_[key];
      }

      std::string
      string(const char* key) const
      {
        const json& v = raw(key);
        if (not v.is_string())
          fail(at(key), "expected a string");
        return v.get<std::string>();
      }

      std::optional<std::string>
      optString(const char* key) const
      {
        if (not has(key))
          return std::nullopt;
        return string(key);
      }

      uint64_t
      integer(const char* key) const
      { return parseInteger(raw(key), at(key)); }

      std::optional<uint64_t>
      optInteger(const char* key) const
      {
        if (not has(key))
          return std::nullopt;
        return integer(key);
      }

      std::optional<bool>
      optBool(const char* key) const
      {
        if (not has(key))
          return std::nullopt;
        const json& v = obj_[key];
        if (not v.is_boolean())
          fail(at(key), "expected true or false");
        return v.get<bool>();
      }

      const json&
      array(const char* key) const
      {
        const json& v = raw(key);
        if (not v.is_array())
          fail(at(key), "expected an array");
        return v;
      }

      uint64_t
      parseInteger(const json& v, const std::string& field) const
      {
        if (v.is_number_unsigned())
          return v.get<uint64_t>();
        if (v.is_number_integer())
          fail(field, "negative values are not allowed");
        if (not v.is_string())
          fail(field, "expected an integer or a numeric string");

        std::string digits;
        for (char c : v.get<std::string>())
          if (c != '_')
            digits += c;
        int base = 10;
        if (digits.size() > 2 and digits[0] == '0' and (digits[1] == 'x' or digits[1] == 'X'))
          {
            base = 16;
            digits = digits.substr(2);
          }
        if (digits.empty() or digits.size() > 16)
          fail(field, "malformed number '" + v.get<std::string>() + "'");
        std::size_t used = 0;
        uint64_t value = 0;
        try
          {
            value = std::stoull(digits, &used, base);
          }
        catch (const std::exception&)
          {
            fail(field, "malformed number '" + v.get<std::string>() + "'");
          }
        if (used != digits.size())
          fail(field, "malformed number '" + v.get<std::string>() + "'");
        return value;
      }

      std::size_t
      line() const
      { return line_; }

    private:
      const json& obj_;
      std::string path_;
      std::size_t line_;
    };

    template <typename Parse>
    auto
    wrapEnum(const Fields& f, const char* key, Parse parse)
    {
      std::string text = f.string(key);
      try
        {
          return parse(text);
        }
      catch (const ParseError&)
        {
          throw;
        }
      catch (const ConfigError& e)
        {
          f.fail(f.at(key), e.what());
        }
    }

    RegionSpec
    parseRegion(const json& obj, const std::string& path, bool guest)
    {
      Fields f(obj, path);
      RegionSpec region;
      region.name = f.string("name");
      if (region.name.empty())
        f.fail(f.at("name"), "region name must not be empty");
      if (not guest)
        region.owner = f.string("owner");
      region.base = f.integer("base");
      region.endInclusive = f.integer("end_inclusive");
      region.perms = wrapEnum(f, "perms", [](const std::string& t) { return Perms::parse(t); });

      auto s = f.optBool("s");
      if (guest)
        region.s = s.value_or(true);
      else
        region.s = s.value_or(region.owner == "HV");

      if (region.base % 4 != 0)
        f.fail(f.at("base"), "base " + hex(region.base) + " is not 4-byte aligned");
      if (region.endInclusive % 4 != 3)
        f.fail(f.at("end_inclusive"), "end " + hex(region.endInclusive) +
               " must be the last byte of a 4-byte granule (end % 4 == 3)");
      if (region.base > region.endInclusive)
        f.fail(path, "base " + hex(region.base) + " > end_inclusive " +
               hex(region.endInclusive));
      if (region.top() > kMaxEncodableTop)
        f.fail(f.at("end_inclusive"), "end " + hex(region.endInclusive) +
               " exceeds the largest encodable top " + hex(kMaxEncodableTop - 1));
      return region;
    }

    Expectation
    parseExpectation(const json& v, const std::string& path, std::size_t line)
    {
      Expectation expect;
      auto decision = [&](const std::string& text) {
        if (text == "permit")
          return true;
        if (text == "deny")
          return false;
        throw ParseError(path + ": expected \"permit\" or \"deny\"", line, path);
      };
      if (v.is_string())
        {
          expect.permit = decision(v.get<std::string>());
          return expect;
        }
      Fields f(v, path, line);
      if (auto d = f.optString("decision"))
        expect.permit = decision(*d);
      expect.pa = f.optInteger("pa");
      if (f.has("stage"))
        expect.stage = wrapEnum(f, "stage", [](const std::string& t) { return parseStage(t); });
      if (f.has("reason"))
        expect.reason = wrapEnum(f, "reason",
                                 [](const std::string& t) { return parseDenyReason(t); });
      return expect;
    }

    TraceStep
    parseStep(const json& obj, const std::string& path, std::size_t line, uint64_t ordinal)
    {
      Fields f(obj, path, line);
      TraceStep step;
      step.step = f.optInteger("step").value_or(ordinal);

      std::string op = f.optString("op").value_or("access");
      if (op == "switch")
        {
          step.op = TraceStep::Op::Switch;
          step.vm = f.string("vm");
          return step;
        }
      if (op != "access")
        f.fail(f.at("op"), "expected \"access\" or \"switch\"");

      step.mode = wrapEnum(f, "mode", [](const std::string& t) { return parsePrivilegeMode(t); });
      step.vm = f.optString("vm").value_or("");
      if ((step.mode == PrivilegeMode::VS or step.mode == PrivilegeMode::VU) and step.vm.empty())
        f.fail(f.at("vm"), "VS/VU accesses must name a VM");
      step.kind = wrapEnum(f, "kind", [](const std::string& t) { return parseAccessKind(t); });
      step.size = unsigned(f.optInteger("size").value_or(4));
      step.gpa = f.integer("gpa");
      if (f.has("expect"))
        step.expect = parseExpectation(obj["expect"], f.at("expect"), line);

      try
        {
          auto ctx = PrivilegeContext::make(step.mode, step.vm.empty()
                                            ? std::nullopt : std::optional(step.vm));
          AccessRequest::make(step.gpa, step.size, step.kind, ctx);
        }
      catch (const ConfigError& e)
        {
          f.fail(path, e.what());
        }
      return step;
    }

    /// Program entries odd-1 (OFF, base) and odd (TOR, top) of a file.
    template <typename File>
    void
    encodeCouple(File& file, unsigned odd, const RegionSpec& region)
    {
      file.write(CsrName::Addr, odd - 1, uint32_t(region.base >> 2));
      file.write(CsrName::Addr, odd, uint32_t(region.top() >> 2));
      EntryCfg tor{region.perms, MatchMode::Tor, region.s};
      uint32_t word = file.read(CsrName::Cfg, odd / 4);
      word &= ~(uint32_t(0xff) << (8 * (odd % 4)));
      word |= uint32_t(tor.encode()) << (8 * (odd % 4));
      file.write(CsrName::Cfg, odd / 4, word);
    }

    std::size_t
    resolveRegion(const Fields& f, const json& ref, const std::vector<RegionSpec>& regions,
                  const std::string& field)
    {
      if (ref.is_number_unsigned())
        {
          auto index = ref.get<std::size_t>();
          if (index >= regions.size())
            f.fail(field, "region index " + std::to_string(index) + " out of range");
          return index;
        }
      if (not ref.is_string())
        f.fail(field, "expected a region name or index");
      auto name = ref.get<std::string>();
      std::optional<std::size_t> found;
      for (std::size_t i = 0; i < regions.size(); ++i)
        if (regions[i].name == name)
          {
            if (found)
              f.fail(field, "region name '" + name + "' is ambiguous; use its index");
            found = i;
          }
      if (not found)
        f.fail(field, "unknown region '" + name + "'");
      return *found;
    }
  }


  ParseError::ParseError(const std::string& what, std::size_t line, std::string field)
    : ConfigError(line ? "line " + std::to_string(line) + ": " + what : what),
      line_(line), field_(std::move(field))
  { }


  bool
  Expectation::matches(const AccessVerdict& verdict) const
  {
    if (permit and *permit != verdict.permitted)
      return false;
    if (pa and (not verdict.pa or verdict.pa->value != *pa))
      return false;
    if (stage and verdict.stage != stage)
      return false;
    if (reason and verdict.reason != reason)
      return false;
    return true;
  }


  ScenarioConfig
  loadConfig(std::string_view text)
  {
    json doc = parseJson(text);
    Fields root(doc, "$");
    ScenarioConfig cfg;

    // VM ids first so region owners can be checked.
    std::set<std::string> vmIds;
    if (root.has("vms"))
      {
        const json& vms = root.array("vms");
        for (std::size_t i = 0; i < vms.size(); ++i)
          {
            Fields f(vms[i], "$.vms[" + std::to_string(i) + "]");
            std::string id = f.string("vm_id");
            if (id.empty() or id == "HV")
              f.fail(f.at("vm_id"), "VM id must be non-empty and not \"HV\"");
            if (not vmIds.insert(id).second)
              f.fail(f.at("vm_id"), "duplicate VM id '" + id + "'");
          }
      }

    const json& regions = root.array("regions");
    if (regions.size() > kMaxRegions)
      root.fail(root.at("regions"), std::to_string(regions.size()) + " regions exceed the " +
                std::to_string(kMaxRegions) + " available OFF-TOR couples");
    for (std::size_t i = 0; i < regions.size(); ++i)
      {
        std::string path = "$.regions[" + std::to_string(i) + "]";
        RegionSpec region = parseRegion(regions[i], path, false);
        Fields f(regions[i], path);
        if (region.owner != "HV" and not vmIds.count(region.owner))
          f.fail(f.at("owner"), "unknown owner '" + region.owner + "'");
        if (region.owner == "HV" and not region.s)
          f.fail(f.at("s"), "hypervisor regions must use S=1 rules");
        if (region.owner != "HV" and region.s)
          f.fail(f.at("s"), "VM regions must use S=0 rules");
        cfg.regions.push_back(std::move(region));
      }

    if (root.has("vms"))
      {
        const json& vms = root.array("vms");
        for (std::size_t i = 0; i < vms.size(); ++i)
          {
            std::string path = "$.vms[" + std::to_string(i) + "]";
            Fields f(vms[i], path);
            VmSpec vm;
            vm.id = f.string("vm_id");
            if (f.has("vspmp"))
              {
                const json& rules = f.array("vspmp");
                if (rules.size() > kMaxRegions)
                  f.fail(f.at("vspmp"), "too many vSPMP regions");
                std::vector<RegionSpec> guest;
                for (std::size_t j = 0; j < rules.size(); ++j)
                  guest.push_back(parseRegion(rules[j], f.at("vspmp") + "[" +
                                              std::to_string(j) + "]", true));
                vm.vspmp = std::move(guest);
              }
            if (f.has("offsets"))
              {
                const json& offsets = f.array("offsets");
                for (std::size_t j = 0; j < offsets.size(); ++j)
                  {
                    std::string opath = f.at("offsets") + "[" + std::to_string(j) + "]";
                    Fields of(offsets[j], opath);
                    OffsetSpec offset;
                    offset.region = resolveRegion(of, of.raw("region"), cfg.regions,
                                                  of.at("region"));
                    offset.byteOffset = of.integer("offset");
                    if (cfg.regions[offset.region].owner != vm.id)
                      of.fail(of.at("region"), "region '" + cfg.regions[offset.region].name +
                              "' is not owned by " + vm.id);
                    if (offset.byteOffset % 4 != 0)
                      of.fail(of.at("offset"), "offset must be a multiple of 4");
                    if (offset.byteOffset >= kAddressSpaceSize)
                      of.fail(of.at("offset"), "offset exceeds the 34-bit address space");
                    for (const auto& prior : vm.offsets)
                      if (prior.region == offset.region)
                        of.fail(of.at("region"), "duplicate offset for region");
                    vm.offsets.push_back(offset);
                  }
              }
            cfg.vms.push_back(std::move(vm));
          }
      }

    if (root.has("trace"))
      {
        const json& trace = root.array("trace");
        for (std::size_t i = 0; i < trace.size(); ++i)
          {
            TraceStep step = parseStep(trace[i], "$.trace[" + std::to_string(i) + "]", 0, i + 1);
            if (not step.vm.empty() and not vmIds.count(step.vm))
              throw ParseError("$.trace[" + std::to_string(i) + "].vm: unknown VM '" +
                               step.vm + "'", 0, "$.trace[" + std::to_string(i) + "].vm");
            cfg.trace.push_back(std::move(step));
          }
      }
    return cfg;
  }


  std::vector<TraceStep>
  loadTrace(std::string_view text)
  {
    std::vector<TraceStep> steps;
    std::size_t lineNo = 0;
    std::size_t pos = 0;
    while (pos <= text.size())
      {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
          eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++lineNo;

        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos or line[first] == '#')
          continue;
        json obj = parseJson(line, lineNo);
        steps.push_back(parseStep(obj, "$", lineNo, steps.size() + 1));
      }
    return steps;
  }


  std::vector<CsrWrite>
  loadUpdate(std::string_view text)
  {
    json doc = parseJson(text);
    if (not doc.is_array())
      throw ParseError("$: update document must be a JSON array", 0, "$");
    std::vector<CsrWrite> writes;
    for (std::size_t i = 0; i < doc.size(); ++i)
      {
        Fields f(doc[i], "$[" + std::to_string(i) + "]");
        CsrWrite write;
        write.name = wrapEnum(f, "csr", [](const std::string& t) { return parseCsrName(t); });
        uint64_t index = f.integer("index");
        if (index >= csrCount(write.name))
          f.fail(f.at("index"), std::string(toString(write.name)) + std::to_string(index) +
                 " does not exist");
        write.index = unsigned(index);

        uint64_t value = f.integer("value");
        if (f.optBool("byte").value_or(false))
          {
            switch (write.name)
              {
              case CsrName::Addr:
                if (write.index % 2 == 0)
                  {
                    if (value % 4 != 0)
                      f.fail(f.at("value"), "byte base must be 4-byte aligned");
                    value >>= 2;
                  }
                else
                  {
                    if (value % 4 != 3)
                      f.fail(f.at("value"), "byte end must satisfy end % 4 == 3");
                    value = (value + 1) >> 2;
                  }
                break;
              case CsrName::Offset:
                if (value % 4 != 0)
                  f.fail(f.at("value"), "byte offset must be a multiple of 4");
                value >>= 2;
                break;
              default:
                f.fail(f.at("byte"), "byte values apply to hpmpaddr and hpmpoffset only");
              }
          }
        if (value > 0xffff'ffffull)
          f.fail(f.at("value"), "value does not fit a 32-bit register");
        write.value = uint32_t(value);
        writes.push_back(write);
      }
    return writes;
  }


  std::string
  readFile(const std::string& path)
  {
    std::ifstream in(path, std::ios::binary);
    if (not in)
      throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }


  CsrFile
  buildHpmp(const ScenarioConfig& cfg)
  {
    CsrFile file;
    for (std::size_t k = 0; k < cfg.regions.size(); ++k)
      encodeCouple(file, unsigned(2 * k + 1), cfg.regions[k]);
    return file;
  }


  VspmpFile
  buildVspmp(std::span<const RegionSpec> regions)
  {
    if (regions.size() > kMaxRegions)
      throw ConfigError("too many vSPMP regions");
    VspmpFile file;
    uint64_t enabled = 0;
    for (std::size_t k = 0; k < regions.size(); ++k)
      {
        unsigned odd = unsigned(2 * k + 1);
        encodeCouple(file, odd, regions[k]);
        enabled |= uint64_t(1) << odd;
      }
    file.write(CsrName::Switch, 0, uint32_t(enabled));
    file.write(CsrName::Switch, 1, uint32_t(enabled >> 32));
    return file;
  }


  VspmpFile
  permissiveVspmp()
  {
    RegionSpec all{"all", "", 0, kMaxEncodableTop - 1, Perms{true, true, true}, true};
    return buildVspmp(std::span(&all, 1));
  }


  Hypervisor
  buildHypervisor(const ScenarioConfig& cfg)
  {
    CsrFile hpmp = buildHpmp(cfg);
    std::vector<VmContext> contexts;
    for (std::size_t v = 0; v < cfg.vms.size(); ++v)
      {
        const VmSpec& vm = cfg.vms[v];
        uint64_t mask = 0;
        for (std::size_t k = 0; k < cfg.regions.size(); ++k)
          if (cfg.regions[k].owner == vm.id)
            mask |= uint64_t(1) << (2 * k + 1);
        std::map<unsigned, uint32_t> offsets;
        for (const auto& offset : vm.offsets)
          offsets[unsigned(2 * offset.region + 1)] = uint32_t(offset.byteOffset >> 2);
        VspmpFile guest = vm.vspmp ? buildVspmp(*vm.vspmp) : permissiveVspmp();
        contexts.emplace_back(vm.id, std::move(guest), mask, std::move(offsets),
                              /*cpuState=*/v + 1);
      }
    return Hypervisor(std::move(hpmp), std::move(contexts));
  }

}
