// SPDX-License-Identifier: Apache-2.0
#include "epur/energy.hpp"

#include <algorithm>
#include <cmath>

namespace epur::energy {

using sched::Access;
using sched::Target;

namespace {

constexpr double pJ = 1e-12;

const std::vector<std::string> kOnChip = {"weight_buffer", "row_buffer", "input_buffer",
                                          "intermediate_memory"};

std::string key(Target t, Access a) {
  return std::string(sched::to_string(t)) + "." + std::string(sched::to_string(a));
}

std::uint64_t powered(std::uint64_t high_water, std::uint64_t capacity, const arch::HardwareConfig& cfg) {
  if (!cfg.power_gating) return capacity;
  const std::uint64_t banks = (high_water + cfg.bank_bytes - 1) / cfg.bank_bytes;
  return std::min(capacity, banks * cfg.bank_bytes);
}

Ratio ratio(std::string name, double a, double b) {
  Ratio r{std::move(name), a, b, 1.0, b > a};
  if (a != 0.0) {
    r.ratio = b / a;
  } else if (b != 0.0) {
    r.ratio = INFINITY;
  }
  return r;
}

}  // namespace

EnergyTable EnergyTable::defaults() {
  EnergyTable t;
  t.dynamic = {
      {"weight_buffer.read", 1.0 * pJ},        {"weight_buffer.write", 1.1 * pJ},
      {"row_buffer.read", 0.08 * pJ},          {"row_buffer.write", 0.1 * pJ},
      {"input_buffer.read", 0.1 * pJ},         {"input_buffer.write", 0.12 * pJ},
      {"intermediate_memory.read", 0.9 * pJ},  {"intermediate_memory.write", 1.0 * pJ},
      {"dram.read", 200.0 * pJ},               {"dram.write", 200.0 * pJ},
      {"dpu.subvector", 12.0 * pJ},            {"mu.op", 1.5 * pJ},
  };
  for (const auto& c : kOnChip) t.leakage_per_byte[c] = 1e-8;
  t.leakage = {{"dpu", 2e-3}, {"mu", 1e-3}, {"dram", 0.0}};
  return t;
}

void EnergyTable::validate() const {
  auto check = [](const std::map<std::string, double>& m) {
    for (const auto& [k, v] : m) {
      require(std::isfinite(v) && v >= 0.0, ErrorKind::config,
              "energy entry '" + k + "' must be finite and non-negative");
    }
  };
  check(dynamic);
  check(leakage_per_byte);
  check(leakage);
  double onchip_max = 0.0;
  for (const auto& c : kOnChip) {
    for (const char* rw : {".read", ".write"}) {
      auto it = dynamic.find(c + rw);
      if (it != dynamic.end()) onchip_max = std::max(onchip_max, it->second);
    }
  }
  for (const char* k : {"dram.read", "dram.write"}) {
    auto it = dynamic.find(k);
    if (it == dynamic.end()) continue;
    require(it->second > onchip_max, ErrorKind::config,
            std::string(k) + " must cost more per byte than any on-chip access");
  }
}

double EnergyTable::cost(const std::string& k) const {
  auto it = dynamic.find(k);
  if (it == dynamic.end()) fail(ErrorKind::config, "energy table has no entry for '" + k + "'");
  return it->second;
}

std::string_view to_string(Group g) {
  switch (g) {
    case Group::scratchpad: return "scratchpad";
    case Group::operations: return "operations";
    case Group::main_memory: return "main_memory";
  }
  return "?";
}

Group group_of(std::string_view c) {
  if (c == "dpu" || c == "mu") return Group::operations;
  if (c == "dram") return Group::main_memory;
  return Group::scratchpad;
}

const std::vector<std::string>& components() {
  static const std::vector<std::string> names = {"weight_buffer", "row_buffer",
                                                 "input_buffer",  "intermediate_memory",
                                                 "dpu",           "mu",
                                                 "dram"};
  return names;
}

double EnergyReport::component_total(const std::string& c) const {
  double v = 0.0;
  if (auto it = dynamic_by_component.find(c); it != dynamic_by_component.end()) v += it->second;
  if (auto it = leakage_by_component.find(c); it != leakage_by_component.end()) v += it->second;
  return v;
}

EnergyReport account(const arch::SimReport& sim, const EnergyTable& table,
                     const arch::HardwareConfig& cfg) {
  table.validate();
  EnergyReport r;
  r.network = sim.network;
  r.hardware = sim.hardware;
  r.policy = sim.policy;
  r.timesteps = sim.timesteps;
  r.seconds = sim.seconds;
  for (const auto& c : components()) {
    r.dynamic_by_component[c] = 0.0;
    r.leakage_by_component[c] = 0.0;
  }

  for (int t = 0; t < sched::kTargetCount; ++t) {
    for (Access a : {Access::read, Access::write}) {
      const auto& counter = sim.counts.at(Target(t), a);
      const std::string name(sched::to_string(Target(t)));
      r.access_bytes[name] += counter.bytes;
      if (counter.bytes == 0) continue;
      r.dynamic_by_component[name] += double(counter.bytes) * table.cost(key(Target(t), a));
    }
  }
  if (sim.dpu_subvector_ops > 0) {
    r.dynamic_by_component["dpu"] = double(sim.dpu_subvector_ops) * table.cost("dpu.subvector");
  }
  if (sim.mu_ops > 0) r.dynamic_by_component["mu"] = double(sim.mu_ops) * table.cost("mu.op");

  const auto& hw = sim.high_water;
  const bool has_row_buffer = sim.policy == sched::Policy::mwl;
  r.powered_bytes = {
      {"weight_buffer", 4 * powered(hw.weight_buffer_per_cu, cfg.weight_mem_bytes_per_cu, cfg)},
      {"row_buffer", has_row_buffer ? 4 * cfg.row_buffer_bytes_per_cu : 0},
      {"input_buffer", 4 * cfg.input_mem_bytes_per_cu},
      {"intermediate_memory", powered(hw.intermediate_memory, cfg.intermediate_mem_bytes, cfg)},
  };
  auto leak = [&](const std::map<std::string, double>& m, const std::string& k) {
    auto it = m.find(k);
    if (it == m.end()) fail(ErrorKind::config, "energy table has no leakage entry for '" + k + "'");
    return it->second;
  };
  if (sim.seconds > 0.0) {
    for (const auto& [c, bytes] : r.powered_bytes) {
      if (bytes > 0) r.leakage_by_component[c] = double(bytes) * leak(table.leakage_per_byte, c) * sim.seconds;
    }
    r.leakage_by_component["dpu"] = 4.0 * leak(table.leakage, "dpu") * sim.seconds;
    r.leakage_by_component["mu"] = 4.0 * leak(table.leakage, "mu") * sim.seconds;
    r.leakage_by_component["dram"] = leak(table.leakage, "dram") * sim.seconds;
  }

  for (const auto& [c, v] : r.dynamic_by_component) r.dynamic_total += v;
  for (const auto& [c, v] : r.leakage_by_component) r.leakage_total += v;
  r.total = r.dynamic_total + r.leakage_total;
  for (Group g : {Group::scratchpad, Group::operations, Group::main_memory}) {
    r.group_fraction[std::string(to_string(g))] = 0.0;
  }
  if (r.total > 0.0) {
    for (const auto& c : components()) {
      r.group_fraction[std::string(to_string(group_of(c)))] += r.component_total(c) / r.total;
    }
  }
  return r;
}

Comparison compare(const EnergyReport& a, const EnergyReport& b) {
  require(a.network == b.network && a.timesteps == b.timesteps, ErrorKind::config,
          "cannot compare runs of different networks or inputs ('" + a.network + "' T=" +
              std::to_string(a.timesteps) + " vs '" + b.network + "' T=" +
              std::to_string(b.timesteps) + ")");
  Comparison cmp;
  auto get = [](const auto& m, const std::string& k) -> double {
    auto it = m.find(k);
    return it == m.end() ? 0.0 : double(it->second);
  };
  for (const auto& c : components()) {
    cmp.dynamic.push_back(ratio(c, get(a.dynamic_by_component, c), get(b.dynamic_by_component, c)));
    cmp.leakage.push_back(ratio(c, get(a.leakage_by_component, c), get(b.leakage_by_component, c)));
    if (cmp.dynamic.back().other_higher) cmp.flagged.push_back(c + ".dynamic");
    if (cmp.leakage.back().other_higher) cmp.flagged.push_back(c + ".leakage");
  }
  std::vector<std::string> targets;
  for (const auto& [k, v] : a.access_bytes) targets.push_back(k);
  for (const auto& [k, v] : b.access_bytes) {
    if (!a.access_bytes.contains(k)) targets.push_back(k);
  }
  for (const auto& k : targets) {
    cmp.accesses.push_back(ratio(k, get(a.access_bytes, k), get(b.access_bytes, k)));
  }
  cmp.dynamic_total = ratio("dynamic", a.dynamic_total, b.dynamic_total);
  cmp.leakage_total = ratio("leakage", a.leakage_total, b.leakage_total);
  cmp.total = ratio("total", a.total, b.total);
  return cmp;
}

}  // namespace epur::energy
