// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "epur/arch.hpp"

namespace epur::arch {

using sched::Access;
using sched::AccessEvent;
using sched::ObjectKind;
using sched::Policy;
using sched::Target;

namespace {

std::string layer_tag(std::size_t l) { return "layer " + std::to_string(l); }

std::uint64_t layer_sequence_bytes(int dim, int T, std::size_t elem) {
  return std::uint64_t(dim) * std::uint64_t(T) * elem;
}

/// Bytes of one intermediate-memory half: big enough for the network input and
/// for every layer's output sequence.
std::uint64_t half_bytes(const NetworkDescriptor& net, int T) {
  std::uint64_t half = layer_sequence_bytes(net.input_dim, T, net.element_size());
  for (const auto& layer : net.layers) {
    half = std::max(half, layer_sequence_bytes(layer.output_size(), T, net.element_size()));
  }
  return half;
}

std::uint64_t partial_region_bytes(const LayerDescriptor& layer, int T, std::uint32_t partial_bytes) {
  return 4u * std::uint64_t(T) * std::uint64_t(layer.hidden_size) * partial_bytes;
}

// ---------------------------------------------------------------------------
// Functional datapath

class Dpu {
 public:
  Dpu(bool exact, int width) : exact_(exact), width_(width), lanes_(std::size_t(width)) {}

  float accumulate(float acc, std::span<const float> w, std::span<const float> v) {
    if (exact_) {
      for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * v[k];
      return acc;
    }
    for (std::size_t base = 0; base < w.size(); base += std::size_t(width_)) {
      const std::size_t n = std::min(w.size() - base, std::size_t(width_));
      std::fill(lanes_.begin(), lanes_.end(), 0.0f);
      for (std::size_t k = 0; k < n; ++k) lanes_[k] = w[base + k] * v[base + k];
      for (std::size_t span = lanes_.size() / 2; span >= 1; span /= 2) {
        for (std::size_t k = 0; k < span; ++k) lanes_[k] = lanes_[2 * k] + lanes_[2 * k + 1];
      }
      acc += lanes_[0];
    }
    return acc;
  }

 private:
  bool exact_;
  int width_;
  std::vector<float> lanes_;
};

struct Preacts {
  std::array<std::vector<float>, 4> by_gate;
};

/// MU work for one step: activations, cell update, output. Mirrors the
/// reference cell's arithmetic so exact mode stays bit-identical.
void mu_step(const WeightSet& w, bool peephole, Precision precision, const Preacts& pre,
             CellState& state) {
  const int hidden = w.hidden_size();
  std::vector<float> c_next(std::size_t(hidden), 0.0f);
  auto finish = [&](Gate g, int j, std::span<const float> c) {
    float a = pre.by_gate[std::size_t(gate_index(g))][std::size_t(j)];
    if (peephole && has_peephole_term(g)) a += w[g].peephole[std::size_t(j)] * c[std::size_t(j)];
    return a + w[g].bias[std::size_t(j)];
  };
  for (int j = 0; j < hidden; ++j) {
    const float i = sigmoid(finish(Gate::input, j, state.c));
    const float f = sigmoid(finish(Gate::forget, j, state.c));
    const float g = tanh_activation(finish(Gate::cell_updater, j, state.c));
    c_next[std::size_t(j)] = to_storage(f * state.c[std::size_t(j)] + i * g, precision);
  }
  for (int j = 0; j < hidden; ++j) {
    const float o = sigmoid(finish(Gate::output, j, c_next));
    state.h[std::size_t(j)] = to_storage(o * tanh_activation(c_next[std::size_t(j)]), precision);
  }
  state.c = std::move(c_next);
  require_finite(state.c, "cell state");
}

void run_pass(Policy policy, const LayerDescriptor& layer, const WeightSet& w, int direction,
              const Sequence& in, Sequence& out, Precision precision, Dpu& dpu,
              const std::optional<DequantTable>& table) {
  const int T = in.length();
  const int hidden = layer.hidden_size;
  const bool reverse = direction == 1;
  auto frame_of = [&](int step) { return reverse ? T - 1 - step : step; };

  // MWL forward phase: one W_gx row at a time over the whole sequence.
  std::array<std::vector<float>, 4> partials;
  if (policy == Policy::mwl) {
    for (Gate g : kGates) {
      auto& p = partials[std::size_t(gate_index(g))];
      p.assign(std::size_t(hidden) * std::size_t(T), 0.0f);
      for (int j = 0; j < hidden; ++j) {
        const auto row = w[g].forward.row(j);
        for (int step = 0; step < T; ++step) {
          const int t = frame_of(step);
          float v = dpu.accumulate(0.0f, row, in.frame(t));
          if (table) v = (*table)(quantize(v, table->config()));
          p[std::size_t(j) * std::size_t(T) + std::size_t(t)] = v;
        }
      }
    }
  }

  CellState state = CellState::zeros(hidden);
  Preacts pre;
  for (auto& v : pre.by_gate) v.assign(std::size_t(hidden), 0.0f);
  for (int step = 0; step < T; ++step) {
    const int t = frame_of(step);
    for (Gate g : kGates) {
      auto& dst = pre.by_gate[std::size_t(gate_index(g))];
      for (int j = 0; j < hidden; ++j) {
        float acc = 0.0f;
        if (policy == Policy::mwl) {
          acc = partials[std::size_t(gate_index(g))][std::size_t(j) * std::size_t(T) + std::size_t(t)];
        } else {
          acc = dpu.accumulate(0.0f, w[g].forward.row(j), in.frame(t));
        }
        dst[std::size_t(j)] = dpu.accumulate(acc, w[g].recurrent.row(j), state.h);
      }
    }
    mu_step(w, layer.peephole, precision, pre, state);
    std::copy(state.h.begin(), state.h.end(),
              out.frame(t).begin() + std::ptrdiff_t(direction) * hidden);
  }
}

// ---------------------------------------------------------------------------
// Timing

struct PassClock {
  std::uint64_t cycles = 0;
  std::uint64_t recurrent_wait = 0;
  std::uint64_t subvector_ops = 0;  // per CU
  std::uint64_t dot_products = 0;   // per CU
  std::uint64_t activations = 0;
  std::uint64_t quantized_partials = 0;
};

class MuPort {
 public:
  MuPort(int ii, std::string where) : ii_(std::uint64_t(ii)), where_(std::move(where)) {}

  void accept(std::uint64_t ready, int step, int neuron) {
    if (ready < free_) {
      fail(ErrorKind::invariant,
           "MU bottleneck in " + where_ + ": result of neuron " + std::to_string(neuron) +
               " at step " + std::to_string(step) + " ready at cycle " + std::to_string(ready) +
               " but the MU only accepts at cycle " + std::to_string(free_) +
               " (initiation interval " + std::to_string(ii_) + ")");
    }
    free_ = ready + ii_;
  }

 private:
  std::uint64_t ii_;
  std::uint64_t free_ = 0;
  std::string where_;
};

PassClock time_pass(Policy policy, const sched::PassShape& s, int T, const HardwareConfig& cfg,
                    const MuPlan& plan, bool quantize, const std::string& where) {
  const std::uint64_t kx = std::uint64_t(subvectors(s.input_size, cfg));
  const std::uint64_t kh = std::uint64_t(subvectors(s.hidden_size, cfg));
  const std::uint64_t tail = std::uint64_t(cfg.latency.mul + cfg.tree_depth() + cfg.latency.add);
  const std::uint64_t mu_latency = std::uint64_t(plan.latency());
  const std::uint64_t comm = std::uint64_t(cfg.mu_comm_cycles);
  const std::uint64_t quant_latency =
      std::uint64_t(cfg.latency.mul + cfg.latency.add + cfg.latency.cmp);
  MuPort mu(cfg.mu_initiation_interval, where);

  PassClock clk;
  std::uint64_t issue = 0;    // next free DPU issue slot
  std::uint64_t h_ready = 0;  // h_{t-1} present in every input buffer

  if (policy == Policy::mwl) {
    std::uint64_t partials_done = 0;
    for (int j = 0; j < s.hidden_size; ++j) {
      for (int step = 0; step < T; ++step) {
        issue += kx;
        const std::uint64_t done = issue + tail;
        if (quantize) {
          mu.accept(done, step, j);
          partials_done = std::max(partials_done, done + quant_latency);
          ++clk.quantized_partials;
        } else {
          partials_done = std::max(partials_done, done);
        }
      }
    }
    h_ready = partials_done;
  }

  for (int step = 0; step < T; ++step) {
    std::uint64_t h_done = 0;
    for (int j = 0; j < s.hidden_size; ++j) {
      if (policy == Policy::conventional) issue += kx;
      const std::uint64_t start = std::max(issue, h_ready);
      clk.recurrent_wait += start - issue;
      issue = start + kh;
      const std::uint64_t done = issue + tail;
      mu.accept(done, step, j);
      h_done = std::max(h_done, done + mu_latency);
      ++clk.activations;
    }
    h_ready = h_done + comm;
  }
  clk.cycles = h_ready;
  clk.dot_products = 2u * std::uint64_t(T) * std::uint64_t(s.hidden_size);
  clk.subvector_ops = std::uint64_t(T) * std::uint64_t(s.hidden_size) * (kx + kh);
  return clk;
}

std::uint64_t dram_cycles(std::uint64_t bytes, const HardwareConfig& cfg) {
  if (bytes == 0) return 0;
  const double secs = cfg.dram_latency_s + double(bytes) / cfg.dram_bandwidth_bytes_per_s;
  return std::uint64_t(std::ceil(secs * cfg.frequency_hz));
}

// ---------------------------------------------------------------------------
// Intermediate-memory address ranges, for the double-buffering check.

using Range = std::pair<std::uint64_t, std::uint64_t>;  // [begin, end)

std::vector<Range> merge_ranges(std::vector<Range> r) {
  std::sort(r.begin(), r.end());
  std::vector<Range> out;
  for (const auto& x : r) {
    if (!out.empty() && x.first <= out.back().second) {
      out.back().second = std::max(out.back().second, x.second);
    } else {
      out.push_back(x);
    }
  }
  return out;
}

bool overlaps(const std::vector<Range>& a, const std::vector<Range>& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].second <= b[j].first) {
      ++i;
    } else if (b[j].second <= a[i].first) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

}  // namespace

void check_capacity(const NetworkDescriptor& net, Policy policy, int T, const HardwareConfig& cfg,
                    std::uint32_t partial_bytes) {
  const std::uint64_t elem = net.element_size();
  std::uint64_t partials_max = 0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const std::uint64_t nx = std::uint64_t(layer.input_size);
    const std::uint64_t nh = std::uint64_t(layer.hidden_size);
    const std::uint64_t weights =
        (policy == Policy::mwl ? nh * nh : nh * (nx + nh)) * elem;
    if (weights > cfg.weight_mem_bytes_per_cu) {
      fail(ErrorKind::capacity, layer_tag(l) + ": weight memory per CU needs " +
                                    std::to_string(weights) + " bytes, has " +
                                    std::to_string(cfg.weight_mem_bytes_per_cu) + " (deficit " +
                                    std::to_string(weights - cfg.weight_mem_bytes_per_cu) + ")");
    }
    const std::uint64_t inputs = (policy == Policy::mwl ? std::max(nx, nh) : nx + nh) * elem;
    if (inputs > cfg.input_mem_bytes_per_cu) {
      fail(ErrorKind::capacity, layer_tag(l) + ": input buffer per CU needs " +
                                    std::to_string(inputs) + " bytes, has " +
                                    std::to_string(cfg.input_mem_bytes_per_cu) + " (deficit " +
                                    std::to_string(inputs - cfg.input_mem_bytes_per_cu) + ")");
    }
    if (policy == Policy::mwl) {
      partials_max = std::max(partials_max, partial_region_bytes(layer, T, partial_bytes));
    }
  }
  const std::uint64_t needed = 2 * half_bytes(net, T) + partials_max;
  if (needed > cfg.intermediate_mem_bytes) {
    fail(ErrorKind::capacity, "intermediate memory needs " + std::to_string(needed) +
                                  " bytes for T=" + std::to_string(T) + ", has " +
                                  std::to_string(cfg.intermediate_mem_bytes) + " (deficit " +
                                  std::to_string(needed - cfg.intermediate_mem_bytes) + ")");
  }
}

SimReport simulate(const NetworkDescriptor& net, const NetworkWeights* weights,
                   const Sequence* input, int T, const HardwareConfig& cfg,
                   const SimOptions& opts) {
  cfg.validate();
  net.validate();
  if (weights) validate_weights(net, *weights);
  if (input) {
    require(input->dim() == net.input_dim, ErrorKind::shape,
            "input frames have " + std::to_string(input->dim()) + " elements, network expects " +
                std::to_string(net.input_dim));
    T = input->length();
  }
  require(T >= 1, ErrorKind::shape, "sequence length must be at least 1");
  require(opts.frames_per_second > 0.0, ErrorKind::config, "frames_per_second must be positive");

  const Policy policy = opts.policy;
  const bool quantize = opts.quantize && policy == Policy::mwl;
  const std::uint32_t partial_bytes = quantize ? std::uint32_t(opts.quant.code_bytes()) : 4u;
  check_capacity(net, policy, T, cfg, partial_bytes);

  SimReport r;
  r.network = net.name;
  r.hardware = cfg.name;
  r.policy = policy;
  r.timesteps = T;
  r.exact = opts.exact;
  r.quantized = quantize;
  r.quant = opts.quant;
  if (opts.quantize && policy == Policy::conventional) {
    r.warnings.push_back("quantization only applies to the mwl schedule; ignored");
  }

  const std::array<MuPlan, 2> plans = {mu_plan(cfg, false), mu_plan(cfg, true)};
  std::uint64_t ops_per_activation[2];
  for (int p = 0; p < 2; ++p) {
    ops_per_activation[p] = std::uint64_t(std::count_if(
        plans[std::size_t(p)].ops.begin(), plans[std::size_t(p)].ops.end(),
        [](const MuOp& o) { return o.kind != MuOpKind::comm; }));
  }

  const std::uint64_t elem = net.element_size();
  const std::uint64_t half = half_bytes(net, T);

  // DRAM: input sequence first, then whole-pass weight fetches double
  // buffered against compute, then softmax weights and the output sequence.
  r.dram = sched::dram_traffic(net, policy, T, partial_bytes);
  std::uint64_t pipe_free = dram_cycles(r.dram.input_bytes, cfg);
  std::uint64_t prev_end = 0, prev_prev_end = 0;
  std::size_t pass_index = 0;

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const MuPlan& plan = plans[layer.peephole ? 1 : 0];
    r.mu_latency_cycles = std::max(r.mu_latency_cycles, plan.latency());
    const std::uint64_t in_base = (l % 2) * half;
    const std::uint64_t out_base = ((l + 1) % 2) * half;
    std::vector<Range> reads, writes;
    std::uint64_t partials = 0;

    for (int d = 0; d < layer.directions(); ++d) {
      const auto shape =
          sched::pass_shape(layer, net.precision, d, partial_bytes,
                            std::uint32_t(cfg.row_buffer_bytes_per_cu));
      const std::string where = layer_tag(l) + " direction " + std::to_string(d);
      PassTiming pt;
      pt.layer = int(l);
      pt.direction = d;
      pt.row_buffer_fallback = policy == Policy::mwl && shape.row_buffer_fallback();
      if (pt.row_buffer_fallback) {
        r.warnings.push_back(where + ": W_gx row of " + std::to_string(shape.forward_row_bytes()) +
                             " bytes exceeds the row buffer; reading from the weight buffer");
        spdlog::warn("{}", r.warnings.back());
      }

      sched::for_each_event(policy, shape, T, [&](const AccessEvent& e) {
        r.counts.add(e);
        if (e.target != Target::intermediate_memory) return;
        if (e.kind == ObjectKind::input_frame) {
          const std::uint64_t a = in_base + std::uint64_t(e.index) * e.bytes;
          reads.emplace_back(a, a + e.bytes);
        } else if (e.kind == ObjectKind::hidden_frame) {
          const std::uint64_t a =
              out_base + (std::uint64_t(e.timestep) * std::uint64_t(layer.output_size()) +
                          std::uint64_t(d) * std::uint64_t(layer.hidden_size) +
                          std::uint64_t(e.neuron)) * elem;
          writes.emplace_back(a, a + e.bytes);
        }
      });
      if (policy == Policy::mwl) partials = partial_region_bytes(layer, T, partial_bytes);

      const PassClock clk = time_pass(policy, shape, T, cfg, plan, quantize, where);
      pt.compute_cycles = clk.cycles;
      pt.recurrent_wait_cycles = clk.recurrent_wait;
      r.recurrent_wait_cycles += clk.recurrent_wait;
      r.compute_cycles += clk.cycles;
      r.dpu_subvector_ops += 4 * clk.subvector_ops;
      r.mu_ops += ops_per_activation[layer.peephole ? 1 : 0] * clk.activations +
                  std::uint64_t(kQuantOpsPerPartial) * 4 * clk.quantized_partials;
      for (auto& n : r.dot_products_per_cu) n += clk.dot_products;

      pt.fetch_bytes = r.dram.passes[pass_index].weight_bytes;
      pt.fetch_start = std::max(pipe_free, prev_prev_end);
      pt.fetch_end = pt.fetch_start + dram_cycles(pt.fetch_bytes, cfg);
      pipe_free = pt.fetch_end;
      pt.compute_start = std::max(prev_end, pt.fetch_end);
      pt.compute_end = pt.compute_start + pt.compute_cycles;
      prev_prev_end = prev_end;
      prev_end = pt.compute_end;
      r.passes.push_back(pt);
      ++pass_index;

      const std::uint64_t weights_per_cu =
          (policy == Policy::mwl ? shape.recurrent_matrix_bytes()
                                 : shape.forward_matrix_bytes() + shape.recurrent_matrix_bytes());
      r.high_water.weight_buffer_per_cu = std::max(r.high_water.weight_buffer_per_cu, weights_per_cu);
      if (policy == Policy::mwl && !shape.row_buffer_fallback()) {
        r.high_water.row_buffer_per_cu =
            std::max<std::uint64_t>(r.high_water.row_buffer_per_cu, shape.forward_row_bytes());
      }
      const std::uint64_t inputs =
          policy == Policy::mwl
              ? std::max(shape.forward_row_bytes(), shape.recurrent_row_bytes())
              : std::uint64_t(shape.forward_row_bytes()) + shape.recurrent_row_bytes();
      r.high_water.input_buffer_per_cu = std::max(r.high_water.input_buffer_per_cu, inputs);
    }

    // Layer inputs come from one half, outputs go to the other.
    const auto in_ranges = merge_ranges(std::move(reads));
    const auto out_ranges = merge_ranges(std::move(writes));
    if (overlaps(in_ranges, out_ranges)) {
      fail(ErrorKind::invariant,
           layer_tag(l) + ": intermediate-memory reads and writes overlap (double buffering)");
    }
    const std::uint64_t in_bytes =
        layer_sequence_bytes(layer.input_size, T, elem);
    const std::uint64_t out_bytes = layer_sequence_bytes(layer.output_size(), T, elem);
    r.high_water.intermediate_memory =
        std::max(r.high_water.intermediate_memory, in_bytes + out_bytes + partials);
  }

  const std::uint64_t tail_bytes = r.dram.softmax_weight_bytes + r.dram.output_bytes;
  r.cycles = std::max(prev_end, pipe_free) + dram_cycles(tail_bytes, cfg);
  r.stall_cycles = r.cycles - r.compute_cycles;
  r.seconds = double(r.cycles) / cfg.frequency_hz;

  auto& dram_read = r.counts.at(Target::dram, Access::read);
  dram_read.events += r.dram.passes.size() + 1 + (r.dram.softmax_weight_bytes > 0 ? 1 : 0);
  dram_read.bytes += r.dram.weight_bytes + r.dram.softmax_weight_bytes + r.dram.input_bytes;
  auto& dram_write = r.counts.at(Target::dram, Access::write);
  dram_write.events += 1;
  dram_write.bytes += r.dram.output_bytes;

  const double dram_bytes = double(r.dram.onchip_total_bytes);
  r.avg_dram_bandwidth = dram_bytes / r.seconds;
  r.realtime_seconds = double(T) / opts.frames_per_second;
  r.realtime_dram_bandwidth = dram_bytes / r.realtime_seconds;
  r.realtime_ok = r.seconds <= r.realtime_seconds;
  r.bandwidth_warning = r.avg_dram_bandwidth > cfg.dram_bandwidth_bytes_per_s;
  if (r.bandwidth_warning) {
    r.warnings.push_back("required DRAM bandwidth exceeds the peak");
    spdlog::warn("{}", r.warnings.back());
  }

  if (opts.functional && weights && input) {
    std::optional<DequantTable> table;
    if (quantize) table.emplace(opts.quant);
    Dpu dpu(opts.exact, cfg.dpu_width);
    Sequence x = to_storage(*input, net.precision);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const auto& layer = net.layers[l];
      Sequence out(T, layer.output_size());
      try {
        for (int d = 0; d < layer.directions(); ++d) {
          run_pass(policy, layer, weights->layers[l].directions[std::size_t(d)], d, x, out,
                   net.precision, dpu, table);
        }
      } catch (const Error& e) {
        throw e.with_context(layer_tag(l));
      }
      x = std::move(out);
    }
    r.outputs = std::move(x);
  }
  return r;
}

SimReport simulate(const NetworkDescriptor& net, const NetworkWeights& weights,
                   const Sequence& input, const HardwareConfig& cfg, const SimOptions& opts) {
  return simulate(net, &weights, &input, input.length(), cfg, opts);
}

}  // namespace epur::arch
