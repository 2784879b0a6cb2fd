// SPDX-License-Identifier: Apache-2.0
//
// Event-count energy model. Dynamic energy is count x per-event cost; leakage
// is powered capacity x power x run time, with unused weight and intermediate
// memory banks power gated.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "epur/arch.hpp"

namespace epur::energy {

struct EnergyTable {
  /// Joules per event. On-chip and DRAM keys are "<target>.read" / "<target>.write"
  /// and count bytes; "dpu.subvector" and "mu.op" count operations.
  std::map<std::string, double> dynamic;
  /// Watts per powered byte for SRAM components ("weight_buffer", "row_buffer",
  /// "input_buffer", "intermediate_memory").
  std::map<std::string, double> leakage_per_byte;
  /// Watts per instance for logic ("dpu" and "mu", per CU) and "dram".
  std::map<std::string, double> leakage;

  /// Representative relative costs; DRAM is about 200x an SRAM byte.
  static EnergyTable defaults();
  /// Non-negative finite entries and DRAM bytes dearer than every on-chip byte.
  void validate() const;
  double cost(const std::string& key) const;
};

enum class Group { scratchpad, operations, main_memory };
std::string_view to_string(Group g);
Group group_of(std::string_view component);

/// Components in report order.
const std::vector<std::string>& components();

struct EnergyReport {
  std::string network;
  std::string hardware;
  sched::Policy policy = sched::Policy::conventional;
  int timesteps = 0;
  double seconds = 0.0;

  std::map<std::string, double> dynamic_by_component;
  std::map<std::string, double> leakage_by_component;
  /// Bytes per on-chip target plus DRAM, reads and writes together.
  std::map<std::string, std::uint64_t> access_bytes;
  std::map<std::string, std::uint64_t> powered_bytes;

  double dynamic_total = 0.0;
  double leakage_total = 0.0;
  double total = 0.0;
  /// All zero for an empty run, otherwise summing to one.
  std::map<std::string, double> group_fraction;

  double component_total(const std::string& c) const;
};

EnergyReport account(const arch::SimReport& report, const EnergyTable& table,
                     const arch::HardwareConfig& cfg);

struct Ratio {
  std::string name;
  double baseline = 0.0;
  double other = 0.0;
  double ratio = 1.0;  // other / baseline; 1 when both are zero
  bool other_higher = false;
};

struct Comparison {
  std::vector<Ratio> dynamic;
  std::vector<Ratio> leakage;
  std::vector<Ratio> accesses;
  Ratio dynamic_total;
  Ratio leakage_total;
  Ratio total;
  /// Components (dynamic or leakage) where the second report is higher.
  std::vector<std::string> flagged;
};

/// Per-component and total ratios of two runs of the same network and input.
Comparison compare(const EnergyReport& baseline, const EnergyReport& other);

}  // namespace epur::energy
