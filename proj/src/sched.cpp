// SPDX-License-Identifier: Apache-2.0
#include "epur/sched.hpp"

namespace epur::sched {

std::string_view to_string(Policy p) { return p == Policy::mwl ? "mwl" : "conventional"; }

std::string_view to_string(Target t) {
  switch (t) {
    case Target::weight_buffer: return "weight_buffer";
    case Target::row_buffer: return "row_buffer";
    case Target::input_buffer: return "input_buffer";
    case Target::intermediate_memory: return "intermediate_memory";
    case Target::dram: return "dram";
  }
  return "?";
}

std::string_view to_string(Access a) { return a == Access::read ? "read" : "write"; }

std::string_view to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::forward_row: return "wx";
    case ObjectKind::recurrent_row: return "wh";
    case ObjectKind::input_frame: return "x";
    case ObjectKind::hidden_frame: return "h";
    case ObjectKind::partial: return "partial";
  }
  return "?";
}

Policy parse_policy(std::string_view s) {
  if (s == "conventional") return Policy::conventional;
  if (s == "mwl") return Policy::mwl;
  fail(ErrorKind::parse, "unknown schedule policy '" + std::string(s) + "'");
}

std::string AccessEvent::object_id() const {
  std::string id = unit < 4 ? std::string(epur::to_string(Gate(unit))) : std::string("shared");
  id += '.';
  id += to_string(kind);
  id += '[' + std::to_string(index) + ']';
  return id;
}

PassShape pass_shape(const LayerDescriptor& layer, Precision precision, int direction,
                     std::uint32_t partial_bytes, std::uint32_t row_buffer_bytes) {
  require(layer.input_size > 0 && layer.hidden_size > 0, ErrorKind::shape,
          "layer dimensions must be positive");
  require(direction >= 0 && direction < layer.directions(), ErrorKind::shape,
          "direction out of range for layer");
  PassShape s;
  s.input_size = layer.input_size;
  s.hidden_size = layer.hidden_size;
  s.element_bytes = std::uint32_t(element_bytes(precision));
  s.partial_bytes = partial_bytes;
  s.row_buffer_bytes = row_buffer_bytes;
  s.reverse = direction == 1;
  return s;
}

namespace {

std::vector<AccessTrace> make_traces(Policy policy, const LayerDescriptor& layer,
                                     Precision precision, int T, std::uint32_t partial_bytes,
                                     std::uint32_t row_buffer_bytes) {
  require(T >= 1, ErrorKind::shape, "sequence length must be at least 1");
  std::vector<AccessTrace> traces;
  for (int d = 0; d < layer.directions(); ++d) {
    AccessTrace trace;
    trace.direction = d;
    trace.policy = policy;
    const auto shape = pass_shape(layer, precision, d, partial_bytes, row_buffer_bytes);
    for_each_event(policy, shape, T, [&](const AccessEvent& e) { trace.events.push_back(e); });
    traces.push_back(std::move(trace));
  }
  return traces;
}

}  // namespace

std::vector<AccessTrace> trace_conventional(const LayerDescriptor& layer, Precision precision, int T,
                                            std::uint32_t row_buffer_bytes) {
  return make_traces(Policy::conventional, layer, precision, T,
                     std::uint32_t(element_bytes(precision)), row_buffer_bytes);
}

std::vector<AccessTrace> trace_mwl(const LayerDescriptor& layer, Precision precision, int T,
                                   std::uint32_t partial_bytes, std::uint32_t row_buffer_bytes) {
  return make_traces(Policy::mwl, layer, precision, T, partial_bytes, row_buffer_bytes);
}

AccessCounts& AccessCounts::operator+=(const AccessCounts& o) {
  for (int t = 0; t < kTargetCount; ++t) {
    for (int a = 0; a < 2; ++a) by[t][a] += o.by[t][a];
  }
  return *this;
}

bool AccessCounts::operator==(const AccessCounts& o) const {
  for (int t = 0; t < kTargetCount; ++t) {
    for (int a = 0; a < 2; ++a) {
      if (!(by[t][a] == o.by[t][a])) return false;
    }
  }
  return true;
}

AccessCounts count_accesses(std::span<const AccessEvent> events) {
  AccessCounts counts;
  for (const auto& e : events) counts.add(e);
  return counts;
}

DramTrafficReport dram_traffic(const NetworkDescriptor& net, Policy policy, int T,
                               std::uint32_t partial_bytes) {
  net.validate();
  require(T >= 1, ErrorKind::shape, "sequence length must be at least 1");
  const std::uint64_t elem = net.element_size();
  const std::uint64_t steps = std::uint64_t(T);

  DramTrafficReport r;
  std::uint64_t spill_streams = 0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    for (int d = 0; d < layer.directions(); ++d) {
      PassTraffic p;
      p.layer = int(l);
      p.direction = d;
      p.weight_bytes = net.pass_weight_bytes(l);
      r.weight_bytes += p.weight_bytes;
      r.passes.push_back(p);

      // Without intermediate memory every pass streams its input sequence in.
      spill_streams += steps * std::uint64_t(layer.input_size) * elem;
      if (policy == Policy::mwl) {
        // Partials written in the forward phase and read back in the recurrent one.
        spill_streams += 2u * 4u * steps * std::uint64_t(layer.hidden_size) * partial_bytes;
      }
    }
    // Every layer writes its output sequence.
    spill_streams += steps * std::uint64_t(layer.output_size()) * elem;
  }
  r.softmax_weight_bytes = net.softmax_weight_bytes();
  r.input_bytes = steps * std::uint64_t(net.input_dim) * elem;
  r.output_bytes = steps * std::uint64_t(net.output_dim()) * elem;
  r.onchip_total_bytes = r.weight_bytes + r.softmax_weight_bytes + r.input_bytes + r.output_bytes;
  r.spill_total_bytes = r.weight_bytes + r.softmax_weight_bytes + spill_streams;
  r.spill_intermediate_bytes = r.spill_total_bytes - r.onchip_total_bytes;
  r.avoided_fraction =
      1.0 - double(r.onchip_total_bytes) / double(r.spill_total_bytes);
  return r;
}

}  // namespace epur::sched
