// SPDX-License-Identifier: Apache-2.0
//
// Access traces for the two evaluation orders and their locality analysis.
//
// A trace covers one pass (one direction of one layer). Each of the four CUs
// owns its weight buffer, row buffer and input buffer, so events carry the CU
// (gate) they belong to; intermediate-memory events that serve all CUs at once
// use kSharedUnit.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epur/model.hpp"

namespace epur::sched {

enum class Policy { conventional, mwl };

enum class Target : std::uint8_t {
  weight_buffer,
  row_buffer,
  input_buffer,
  intermediate_memory,
  dram,
};
inline constexpr int kTargetCount = 5;

enum class Access : std::uint8_t { read, write };

enum class ObjectKind : std::uint8_t {
  forward_row,    // row j of W_gx
  recurrent_row,  // row j of W_gh
  input_frame,    // x_t
  hidden_frame,   // h_{t-1} / h_t of the current pass
  partial,        // forward partial of neuron j at step t
};

inline constexpr std::uint8_t kSharedUnit = 4;

std::string_view to_string(Policy p);
std::string_view to_string(Target t);
std::string_view to_string(Access a);
std::string_view to_string(ObjectKind k);
Policy parse_policy(std::string_view s);

struct AccessEvent {
  Target target;
  Access rw;
  std::uint8_t unit;  // gate index 0..3 or kSharedUnit
  ObjectKind kind;
  std::uint32_t index;  // row, frame or partial slot
  std::uint32_t bytes;
  std::int32_t timestep;  // frame index being processed
  std::int32_t neuron;    // -1 when not neuron-specific

  std::uint64_t object_key() const {
    return (std::uint64_t(kind) << 56) | (std::uint64_t(unit) << 48) | index;
  }
  std::string object_id() const;
};

struct AccessTrace {
  int layer = 0;
  int direction = 0;
  Policy policy = Policy::conventional;
  std::vector<AccessEvent> events;
};

/// Per-pass sizes the generators need.
struct PassShape {
  int input_size = 0;
  int hidden_size = 0;
  std::uint32_t element_bytes = 4;
  /// Bytes of one stored forward partial (n_bits/8 when quantized).
  std::uint32_t partial_bytes = 4;
  std::uint32_t row_buffer_bytes = 4096;
  bool reverse = false;

  std::uint32_t forward_row_bytes() const { return std::uint32_t(input_size) * element_bytes; }
  std::uint32_t recurrent_row_bytes() const { return std::uint32_t(hidden_size) * element_bytes; }
  std::uint64_t forward_matrix_bytes() const {
    return std::uint64_t(hidden_size) * forward_row_bytes();
  }
  std::uint64_t recurrent_matrix_bytes() const {
    return std::uint64_t(hidden_size) * recurrent_row_bytes();
  }
  /// True when a W_gx row does not fit the row buffer; MWL then re-reads it
  /// from the weight buffer on every step.
  bool row_buffer_fallback() const { return forward_row_bytes() > row_buffer_bytes; }
};

PassShape pass_shape(const LayerDescriptor& layer, Precision precision, int direction,
                     std::uint32_t partial_bytes, std::uint32_t row_buffer_bytes = 4096);

// ---------------------------------------------------------------------------
// Generators. The sink is called once per event, in program order.

/// Per step t, per neuron j, per CU: W_gx row j then W_gh row j from the
/// weight buffer, each paired with an input-buffer read of x_t / h_{t-1}.
template <class Sink>
void for_each_conventional(const PassShape& s, int T, Sink&& sink) {
  const std::uint32_t x_bytes = s.forward_row_bytes();
  const std::uint32_t h_bytes = s.recurrent_row_bytes();
  const std::uint32_t out_bytes = s.element_bytes;
  for (int step = 0; step < T; ++step) {
    const int t = s.reverse ? T - 1 - step : step;
    const auto frame = std::uint32_t(t);
    // h_{t-1} slots are numbered by processing step; slot 0 is the zero state.
    const auto h_prev = std::uint32_t(step);
    sink(AccessEvent{Target::intermediate_memory, Access::read, kSharedUnit, ObjectKind::input_frame,
                     frame, x_bytes, t, -1});
    for (std::uint8_t u = 0; u < 4; ++u) {
      sink(AccessEvent{Target::input_buffer, Access::write, u, ObjectKind::input_frame, frame,
                       x_bytes, t, -1});
    }
    for (int j = 0; j < s.hidden_size; ++j) {
      const auto row = std::uint32_t(j);
      for (std::uint8_t u = 0; u < 4; ++u) {
        sink(AccessEvent{Target::weight_buffer, Access::read, u, ObjectKind::forward_row, row,
                         x_bytes, t, j});
        sink(AccessEvent{Target::input_buffer, Access::read, u, ObjectKind::input_frame, frame,
                         x_bytes, t, j});
        sink(AccessEvent{Target::weight_buffer, Access::read, u, ObjectKind::recurrent_row, row,
                         h_bytes, t, j});
        sink(AccessEvent{Target::input_buffer, Access::read, u, ObjectKind::hidden_frame, h_prev,
                         h_bytes, t, j});
      }
      sink(AccessEvent{Target::intermediate_memory, Access::write, kSharedUnit,
                       ObjectKind::hidden_frame, frame * std::uint32_t(s.hidden_size) + row,
                       out_bytes, t, j});
    }
    for (std::uint8_t u = 0; u < 4; ++u) {
      sink(AccessEvent{Target::input_buffer, Access::write, u, ObjectKind::hidden_frame, h_prev + 1,
                       h_bytes, t, -1});
    }
  }
}

/// Forward phase neuron-major over the whole sequence (one W_gx row live in
/// the row buffer), then the recurrent phase in conventional order over W_gh,
/// merging the stored partials.
template <class Sink>
void for_each_mwl(const PassShape& s, int T, Sink&& sink) {
  const std::uint32_t x_bytes = s.forward_row_bytes();
  const std::uint32_t h_bytes = s.recurrent_row_bytes();
  const std::uint32_t out_bytes = s.element_bytes;
  const std::uint32_t p_bytes = s.partial_bytes;
  const bool fallback = s.row_buffer_fallback();

  for (int j = 0; j < s.hidden_size; ++j) {
    const auto row = std::uint32_t(j);
    if (!fallback) {
      for (std::uint8_t u = 0; u < 4; ++u) {
        sink(AccessEvent{Target::weight_buffer, Access::read, u, ObjectKind::forward_row, row,
                         x_bytes, -1, j});
        sink(AccessEvent{Target::row_buffer, Access::write, u, ObjectKind::forward_row, row, x_bytes,
                         -1, j});
      }
    }
    for (int step = 0; step < T; ++step) {
      const int t = s.reverse ? T - 1 - step : step;
      sink(AccessEvent{Target::intermediate_memory, Access::read, kSharedUnit,
                       ObjectKind::input_frame, std::uint32_t(t), x_bytes, t, j});
      for (std::uint8_t u = 0; u < 4; ++u) {
        sink(AccessEvent{Target::input_buffer, Access::write, u, ObjectKind::input_frame,
                         std::uint32_t(t), x_bytes, t, j});
        sink(AccessEvent{fallback ? Target::weight_buffer : Target::row_buffer, Access::read, u,
                         ObjectKind::forward_row, row, x_bytes, t, j});
        sink(AccessEvent{Target::input_buffer, Access::read, u, ObjectKind::input_frame,
                         std::uint32_t(t), x_bytes, t, j});
        sink(AccessEvent{Target::intermediate_memory, Access::write, u, ObjectKind::partial,
                         row * std::uint32_t(T) + std::uint32_t(t), p_bytes, t, j});
      }
    }
  }

  for (int step = 0; step < T; ++step) {
    const int t = s.reverse ? T - 1 - step : step;
    const auto frame = std::uint32_t(t);
    const auto h_prev = std::uint32_t(step);
    for (int j = 0; j < s.hidden_size; ++j) {
      const auto row = std::uint32_t(j);
      for (std::uint8_t u = 0; u < 4; ++u) {
        sink(AccessEvent{Target::intermediate_memory, Access::read, u, ObjectKind::partial,
                         row * std::uint32_t(T) + frame, p_bytes, t, j});
        sink(AccessEvent{Target::weight_buffer, Access::read, u, ObjectKind::recurrent_row, row,
                         h_bytes, t, j});
        sink(AccessEvent{Target::input_buffer, Access::read, u, ObjectKind::hidden_frame, h_prev,
                         h_bytes, t, j});
      }
      sink(AccessEvent{Target::intermediate_memory, Access::write, kSharedUnit,
                       ObjectKind::hidden_frame, frame * std::uint32_t(s.hidden_size) + row,
                       out_bytes, t, j});
    }
    for (std::uint8_t u = 0; u < 4; ++u) {
      sink(AccessEvent{Target::input_buffer, Access::write, u, ObjectKind::hidden_frame, h_prev + 1,
                       h_bytes, t, -1});
    }
  }
}

template <class Sink>
void for_each_event(Policy policy, const PassShape& s, int T, Sink&& sink) {
  if (policy == Policy::mwl) {
    for_each_mwl(s, T, sink);
  } else {
    for_each_conventional(s, T, sink);
  }
}

/// One trace per direction of the layer.
std::vector<AccessTrace> trace_conventional(const LayerDescriptor& layer, Precision precision, int T,
                                            std::uint32_t row_buffer_bytes = 4096);
std::vector<AccessTrace> trace_mwl(const LayerDescriptor& layer, Precision precision, int T,
                                   std::uint32_t partial_bytes,
                                   std::uint32_t row_buffer_bytes = 4096);

// ---------------------------------------------------------------------------
// Counting

struct AccessCounter {
  std::uint64_t events = 0;
  std::uint64_t bytes = 0;

  AccessCounter& operator+=(const AccessCounter& o) {
    events += o.events;
    bytes += o.bytes;
    return *this;
  }
  bool operator==(const AccessCounter&) const = default;
};

/// Event/byte totals by target and direction.
struct AccessCounts {
  AccessCounter by[kTargetCount][2] = {};

  AccessCounter& at(Target t, Access a) { return by[int(t)][int(a)]; }
  const AccessCounter& at(Target t, Access a) const { return by[int(t)][int(a)]; }
  void add(const AccessEvent& e) {
    auto& c = at(e.target, e.rw);
    ++c.events;
    c.bytes += e.bytes;
  }
  AccessCounts& operator+=(const AccessCounts& o);
  bool operator==(const AccessCounts& o) const;
};

AccessCounts count_accesses(std::span<const AccessEvent> events);

// ---------------------------------------------------------------------------
// Reuse analysis

struct StreamKey {
  std::uint8_t unit;
  Target target;
  auto operator<=>(const StreamKey&) const = default;
};

struct ClassKey {
  std::uint8_t unit;
  Target target;
  ObjectKind kind;
  auto operator<=>(const ClassKey&) const = default;
};

struct ReuseSummary {
  std::uint64_t access_count = 0;
  std::uint64_t bytes = 0;
  std::uint64_t reuse_count = 0;
  /// Largest distance in bytes of distinct data (the re-used object included)
  /// touched between consecutive uses of the same object.
  std::uint64_t max_reuse_distance = 0;
  /// Smallest LRU capacity in bytes with no capacity misses.
  std::uint64_t min_buffer_bytes = 0;
  /// Sum of the sizes of the distinct objects touched.
  std::uint64_t footprint_bytes = 0;
};

struct ReuseStats {
  std::map<StreamKey, ReuseSummary> streams;
  std::map<ClassKey, ReuseSummary> classes;

  ReuseSummary stream(std::uint8_t unit, Target target) const;
  ReuseSummary object_class(std::uint8_t unit, Target target, ObjectKind kind) const;
  /// Weight storage a CU needs to never refetch a weight: weight buffer plus
  /// row buffer minimum capacities.
  std::uint64_t min_weight_storage(std::uint8_t unit) const;
};

/// Exact LRU stack distance of each event within its (unit, target) stream;
/// nullopt for first touches.
std::vector<std::optional<std::uint64_t>> stack_distances(std::span<const AccessEvent> events);

ReuseStats reuse_analysis(std::span<const AccessEvent> events);

// ---------------------------------------------------------------------------
// DRAM traffic

struct PassTraffic {
  int layer = 0;
  int direction = 0;
  std::uint64_t weight_bytes = 0;  // matrices + biases + peepholes
};

struct DramTrafficReport {
  std::vector<PassTraffic> passes;
  std::uint64_t weight_bytes = 0;
  std::uint64_t softmax_weight_bytes = 0;
  std::uint64_t input_bytes = 0;
  std::uint64_t output_bytes = 0;
  /// Total with the dedicated on-chip intermediate memory.
  std::uint64_t onchip_total_bytes = 0;
  /// Intermediate results (layer outputs, MWL partials) spilled to DRAM when
  /// there is no intermediate memory.
  std::uint64_t spill_intermediate_bytes = 0;
  std::uint64_t spill_total_bytes = 0;
  /// Fraction of DRAM bytes avoided by keeping intermediates on chip.
  double avoided_fraction = 0.0;
};

/// Each pass's weights are fetched once per inference, independent of T.
DramTrafficReport dram_traffic(const NetworkDescriptor& net, Policy policy, int T,
                               std::uint32_t partial_bytes);

}  // namespace epur::sched
