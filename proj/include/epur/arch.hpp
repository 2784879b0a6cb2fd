// SPDX-License-Identifier: Apache-2.0
//
// Cycle-level model of the accelerator: four computation units (one per
// gate), each a dot-product unit (DPU) feeding a multifunctional unit (MU),
// plus the shared intermediate memory and a flat DRAM pipe.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epur/model.hpp"
#include "epur/quant.hpp"
#include "epur/sched.hpp"

namespace epur::arch {

inline constexpr std::uint64_t KiB = 1024;
inline constexpr std::uint64_t MiB = 1024 * KiB;

enum class MuOpKind : std::uint8_t { move, add, neg, mul, exp, div, cmp, comm };
std::string_view to_string(MuOpKind k);

struct OpLatency {
  int add = 2;
  int mul = 4;
  int exp = 5;
  int div = 5;
  int cmp = 2;
  int move = 1;

  /// Negation runs on the adder.
  int of(MuOpKind k, int comm_cycles) const;
};

struct HardwareConfig {
  std::string name = "epur";
  double frequency_hz = 500e6;
  int dpu_width = 16;
  std::uint64_t weight_mem_bytes_per_cu = 4 * MiB;
  std::uint64_t input_mem_bytes_per_cu = 8 * KiB;
  std::uint64_t row_buffer_bytes_per_cu = 4 * KiB;
  std::uint64_t intermediate_mem_bytes = 6 * MiB;
  OpLatency latency;
  int mu_comm_cycles = 2;
  /// Cycles between two activations entering the same MU.
  int mu_initiation_interval = 1;
  double dram_bandwidth_bytes_per_s = 30e9;
  double dram_latency_s = 100e-9;
  std::uint64_t bank_bytes = 256 * KiB;
  bool power_gating = true;
  sched::Policy default_policy = sched::Policy::conventional;
  /// Quantization of the MWL forward partials.
  bool quantize_partials = true;
  QuantConfig quant = QuantConfig::make(8, kDefaultAlpha);

  void validate() const;
  int tree_depth() const;

  /// "epur" or "epur-mwl".
  static HardwareConfig preset(std::string_view name);
  static std::vector<std::string> preset_names();
};

/// Cycles from the first sub-vector issue to the accumulated result:
/// ceil(M/N) issues, then the multiplier, the log2(N) reduction tree and the
/// accumulator add.
int dpu_dot_cycles(int M, const HardwareConfig& cfg);
int subvectors(int M, const HardwareConfig& cfg);

// ---------------------------------------------------------------------------
// MU dependency graph

struct MuOp {
  Gate unit;
  MuOpKind kind;
  std::string label;
  std::vector<int> deps;  // indices into MuPlan::ops
  int start = 0;
  int finish = 0;
};

/// All four MUs' operations for one neuron, scheduled as soon as their inputs
/// are ready. Time 0 is when the four DPU results are available.
struct MuPlan {
  std::vector<MuOp> ops;
  bool peephole = true;

  /// Cycle at which h_t leaves the output-gate MU.
  int latency() const;
  int finish(Gate g) const;
  int ops_for(Gate g) const;
  const MuOp& find(std::string_view label) const;
};

MuPlan mu_plan(const HardwareConfig& cfg, bool peephole);

struct MuSchedule {
  Gate gate;
  std::vector<MuOp> ops;  // this gate's ops, in issue order
  int first_start = 0;
  int last_start = 0;
  /// Finish of the gate's last op; includes waiting on other MUs.
  int critical_path = 0;
};

MuSchedule mu_schedule(Gate gate, const HardwareConfig& cfg, bool peephole = true);

/// MU operations spent quantizing one forward partial (scale, round, clamp).
inline constexpr int kQuantOpsPerPartial = 3;

// ---------------------------------------------------------------------------
// Simulation

struct SimOptions {
  sched::Policy policy = sched::Policy::conventional;
  /// Sequential accumulation identical to the reference model; otherwise each
  /// N-wide sub-vector is reduced as a binary tree before accumulation.
  bool exact = true;
  /// Evaluate the datapath; timing and counts need only the shapes.
  bool functional = true;
  /// Quantize MWL forward partials (ignored for the conventional schedule).
  bool quantize = false;
  QuantConfig quant = QuantConfig::make(8, kDefaultAlpha);
  /// Input frames per second of real time, for the real-time bandwidth check.
  double frames_per_second = 100.0;
};

struct PassTiming {
  int layer = 0;
  int direction = 0;
  std::uint64_t fetch_bytes = 0;
  std::uint64_t fetch_start = 0;
  std::uint64_t fetch_end = 0;
  std::uint64_t compute_start = 0;
  std::uint64_t compute_end = 0;
  std::uint64_t compute_cycles = 0;
  std::uint64_t recurrent_wait_cycles = 0;
  bool row_buffer_fallback = false;
};

struct HighWater {
  std::uint64_t weight_buffer_per_cu = 0;
  std::uint64_t row_buffer_per_cu = 0;
  std::uint64_t input_buffer_per_cu = 0;
  std::uint64_t intermediate_memory = 0;
};

struct SimReport {
  std::string network;
  std::string hardware;
  sched::Policy policy = sched::Policy::conventional;
  int timesteps = 0;
  bool exact = true;
  bool quantized = false;
  QuantConfig quant;

  std::uint64_t cycles = 0;
  std::uint64_t compute_cycles = 0;
  /// Cycles the CUs sat idle waiting for DRAM.
  std::uint64_t stall_cycles = 0;
  /// DPU idle cycles waiting for h_{t-1} from the MUs.
  std::uint64_t recurrent_wait_cycles = 0;
  double seconds = 0.0;

  /// On-chip counts come from the schedule traces; DRAM transfers are added
  /// under Target::dram.
  sched::AccessCounts counts;
  sched::DramTrafficReport dram;
  double avg_dram_bandwidth = 0.0;       // bytes / simulated second
  double realtime_seconds = 0.0;         // T / frames_per_second
  double realtime_dram_bandwidth = 0.0;  // bytes / real-time second
  bool realtime_ok = true;
  bool bandwidth_warning = false;

  std::uint64_t dpu_subvector_ops = 0;
  std::uint64_t mu_ops = 0;
  std::array<std::uint64_t, 4> dot_products_per_cu{};
  int mu_latency_cycles = 0;

  HighWater high_water;
  std::vector<PassTiming> passes;
  std::vector<std::string> warnings;
  std::optional<Sequence> outputs;
};

/// Capacity checks only: throws ErrorKind::capacity naming the layer and the
/// byte deficit.
void check_capacity(const NetworkDescriptor& net, sched::Policy policy, int T,
                    const HardwareConfig& cfg, std::uint32_t partial_bytes);

SimReport simulate(const NetworkDescriptor& net, const NetworkWeights* weights,
                   const Sequence* input, int T, const HardwareConfig& cfg,
                   const SimOptions& opts);

/// Convenience overload: functional run over an input sequence.
SimReport simulate(const NetworkDescriptor& net, const NetworkWeights& weights,
                   const Sequence& input, const HardwareConfig& cfg, const SimOptions& opts);

}  // namespace epur::arch
