// SPDX-License-Identifier: Apache-2.0
#include "epur/arch.hpp"

#include <bit>

namespace epur::arch {

std::string_view to_string(MuOpKind k) {
  switch (k) {
    case MuOpKind::move: return "move";
    case MuOpKind::add: return "add";
    case MuOpKind::neg: return "neg";
    case MuOpKind::mul: return "mul";
    case MuOpKind::exp: return "exp";
    case MuOpKind::div: return "div";
    case MuOpKind::cmp: return "cmp";
    case MuOpKind::comm: return "comm";
  }
  return "?";
}

int OpLatency::of(MuOpKind k, int comm_cycles) const {
  switch (k) {
    case MuOpKind::move: return move;
    case MuOpKind::add:
    case MuOpKind::neg: return add;
    case MuOpKind::mul: return mul;
    case MuOpKind::exp: return exp;
    case MuOpKind::div: return div;
    case MuOpKind::cmp: return cmp;
    case MuOpKind::comm: return comm_cycles;
  }
  return 1;
}

void HardwareConfig::validate() const {
  auto positive = [](auto v, const char* what) {
    require(v > 0, ErrorKind::config, std::string(what) + " must be positive");
  };
  positive(frequency_hz, "frequency_hz");
  positive(dpu_width, "dpu_width");
  require(std::has_single_bit(unsigned(dpu_width)), ErrorKind::config,
          "dpu_width must be a power of two, got " + std::to_string(dpu_width));
  positive(weight_mem_bytes_per_cu, "weight_mem_bytes_per_cu");
  positive(input_mem_bytes_per_cu, "input_mem_bytes_per_cu");
  positive(row_buffer_bytes_per_cu, "row_buffer_bytes_per_cu");
  positive(intermediate_mem_bytes, "intermediate_mem_bytes");
  positive(bank_bytes, "bank_bytes");
  positive(dram_bandwidth_bytes_per_s, "dram_bandwidth_bytes_per_s");
  require(dram_latency_s >= 0.0, ErrorKind::config, "dram_latency_s must be non-negative");
  for (int v : {latency.add, latency.mul, latency.exp, latency.div, latency.cmp, latency.move,
                mu_comm_cycles, mu_initiation_interval}) {
    require(v >= 1, ErrorKind::config, "latencies must be at least one cycle");
  }
  // Re-derive beta so a hand-edited config cannot carry a stale one.
  (void)QuantConfig::make(quant.n_bits, quant.alpha);
}

int HardwareConfig::tree_depth() const { return std::countr_zero(unsigned(dpu_width)); }

HardwareConfig HardwareConfig::preset(std::string_view name) {
  HardwareConfig cfg;
  if (name == "epur") return cfg;
  if (name == "epur-mwl") {
    cfg.name = "epur-mwl";
    cfg.weight_mem_bytes_per_cu = 2 * MiB;
    cfg.input_mem_bytes_per_cu = 4 * KiB;
    cfg.default_policy = sched::Policy::mwl;
    return cfg;
  }
  fail(ErrorKind::config, "unknown hardware preset '" + std::string(name) + "'");
}

std::vector<std::string> HardwareConfig::preset_names() { return {"epur", "epur-mwl"}; }

int subvectors(int M, const HardwareConfig& cfg) {
  require(M >= 1, ErrorKind::shape, "dot product length must be at least 1");
  return (M + cfg.dpu_width - 1) / cfg.dpu_width;
}

int dpu_dot_cycles(int M, const HardwareConfig& cfg) {
  return subvectors(M, cfg) + cfg.latency.mul + cfg.tree_depth() + cfg.latency.add;
}

}  // namespace epur::arch
