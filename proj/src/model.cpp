// SPDX-License-Identifier: Apache-2.0
#include "epur/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "epur/half.hpp"

namespace epur {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::shape: return "shape error";
    case ErrorKind::numeric: return "numeric error";
    case ErrorKind::range: return "range error";
    case ErrorKind::capacity: return "capacity error";
    case ErrorKind::config: return "configuration error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::io: return "I/O error";
    case ErrorKind::invariant: return "invariant violation";
  }
  return "error";
}

std::string_view to_string(Precision p) { return p == Precision::fp16 ? "fp16" : "fp32"; }

std::string_view to_string(Direction d) {
  return d == Direction::bidirectional ? "bidirectional" : "forward_only";
}

std::string_view to_string(Gate g) {
  switch (g) {
    case Gate::input: return "input";
    case Gate::forget: return "forget";
    case Gate::cell_updater: return "cell_updater";
    case Gate::output: return "output";
  }
  fail(ErrorKind::range, "unknown gate id " + std::to_string(int(g)));
}

Precision parse_precision(std::string_view s) {
  if (s == "fp32") return Precision::fp32;
  if (s == "fp16") return Precision::fp16;
  fail(ErrorKind::parse, "unknown precision '" + std::string(s) + "'");
}

Direction parse_direction(std::string_view s) {
  if (s == "forward_only" || s == "unidirectional") return Direction::forward_only;
  if (s == "bidirectional") return Direction::bidirectional;
  fail(ErrorKind::parse, "unknown direction '" + std::string(s) + "'");
}

Gate parse_gate(std::string_view s) {
  for (Gate g : kGates) {
    if (to_string(g) == s) return g;
  }
  fail(ErrorKind::range, "unknown gate id '" + std::string(s) + "'");
}

std::size_t element_bytes(Precision p) { return p == Precision::fp16 ? 2 : 4; }

float to_storage(float v, Precision p) { return p == Precision::fp16 ? round_to_half(v) : v; }

std::uint64_t LayerDescriptor::gate_matrix_values() const {
  return std::uint64_t(hidden_size) * std::uint64_t(input_size + hidden_size);
}

std::uint64_t LayerDescriptor::pass_values() const {
  const std::uint64_t peepholes = peephole ? 3u * std::uint64_t(hidden_size) : 0u;
  return 4u * (gate_matrix_values() + std::uint64_t(hidden_size)) + peepholes;
}

void NetworkDescriptor::validate() const {
  require(!layers.empty(), ErrorKind::shape, "network has no layers");
  require(input_dim > 0, ErrorKind::shape, "input_dim must be positive");
  require(output_classes >= 0, ErrorKind::shape, "output_classes must be non-negative");
  int expected = input_dim;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const std::string where = "layer " + std::to_string(i);
    require(l.hidden_size > 0, ErrorKind::shape, where + ": hidden_size must be positive");
    require(l.input_size == expected, ErrorKind::shape,
            where + ": input_size " + std::to_string(l.input_size) +
                " does not match previous output dimension " + std::to_string(expected));
    expected = l.output_size();
  }
}

std::uint64_t NetworkDescriptor::pass_weight_bytes(std::size_t layer) const {
  return layers.at(layer).pass_values() * element_size();
}

std::uint64_t NetworkDescriptor::total_weight_bytes() const {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    total += pass_weight_bytes(i) * std::uint64_t(layers[i].directions());
  }
  return total;
}

std::uint64_t NetworkDescriptor::max_pass_weight_bytes() const {
  std::uint64_t best = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) best = std::max(best, pass_weight_bytes(i));
  return best;
}

std::uint64_t NetworkDescriptor::softmax_weight_bytes() const {
  if (output_classes == 0) return 0;
  return std::uint64_t(output_classes) * std::uint64_t(output_dim() + 1) * element_size();
}

WeightSet WeightSet::zeros(int input_size, int hidden_size, bool peephole) {
  WeightSet w;
  for (Gate g : kGates) {
    auto& gw = w[g];
    gw.forward = Matrix(hidden_size, input_size);
    gw.recurrent = Matrix(hidden_size, hidden_size);
    gw.bias.assign(hidden_size, 0.0f);
    if (peephole && has_peephole_term(g)) gw.peephole.assign(hidden_size, 0.0f);
  }
  return w;
}

void require_finite(std::span<const float> v, std::string_view what) {
  for (float x : v) {
    if (!std::isfinite(x)) fail(ErrorKind::numeric, "non-finite value in " + std::string(what));
  }
}

void WeightSet::validate(const LayerDescriptor& layer) const {
  for (Gate g : kGates) {
    const auto& gw = (*this)[g];
    const std::string where = std::string("gate ") + std::string(to_string(g));
    require(gw.forward.rows() == layer.hidden_size && gw.forward.cols() == layer.input_size,
            ErrorKind::shape, where + ": forward matrix shape mismatch");
    require(gw.recurrent.rows() == layer.hidden_size && gw.recurrent.cols() == layer.hidden_size,
            ErrorKind::shape, where + ": recurrent matrix shape mismatch");
    require(int(gw.bias.size()) == layer.hidden_size, ErrorKind::shape,
            where + ": bias length mismatch");
    const bool wants_peephole = layer.peephole && has_peephole_term(g);
    if (wants_peephole) {
      require(int(gw.peephole.size()) == layer.hidden_size, ErrorKind::shape,
              where + ": peephole length mismatch");
    }
    require_finite(gw.forward.values(), where + " forward weights");
    require_finite(gw.recurrent.values(), where + " recurrent weights");
    require_finite(gw.bias, where + " bias");
    if (wants_peephole) require_finite(gw.peephole, where + " peephole");
  }
}

void validate_weights(const NetworkDescriptor& net, const NetworkWeights& weights) {
  net.validate();
  require(weights.layers.size() == net.layers.size(), ErrorKind::shape,
          "weights have " + std::to_string(weights.layers.size()) + " layers, descriptor has " +
              std::to_string(net.layers.size()));
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& lw = weights.layers[i];
    require(int(lw.directions.size()) == net.layers[i].directions(), ErrorKind::shape,
            "layer " + std::to_string(i) + ": wrong number of directions");
    for (const auto& ws : lw.directions) {
      try {
        ws.validate(net.layers[i]);
      } catch (const Error& e) {
        throw e.with_context("layer " + std::to_string(i));
      }
    }
  }
}

void Sequence::append(std::span<const float> frame) {
  require(int(frame.size()) == dim_, ErrorKind::shape,
          "frame has " + std::to_string(frame.size()) + " elements, sequence dim is " +
              std::to_string(dim_));
  data_.insert(data_.end(), frame.begin(), frame.end());
}

Sequence to_storage(const Sequence& s, Precision p) {
  Sequence out = s;
  if (p == Precision::fp16) {
    for (float& v : out.values()) v = round_to_half(v);
  }
  return out;
}

float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

float tanh_activation(float x) { return std::tanh(x); }

std::vector<float> gate_preactivation(const WeightSet& weights, Gate gate, bool peephole,
                                      std::span<const float> x, std::span<const float> h_prev,
                                      std::span<const float> c) {
  const auto& gw = weights[gate];
  const int hidden = weights.hidden_size();
  require(int(x.size()) == weights.input_size(), ErrorKind::shape,
          "x has " + std::to_string(x.size()) + " elements, expected " +
              std::to_string(weights.input_size()));
  require(int(h_prev.size()) == hidden, ErrorKind::shape, "h_prev length mismatch");
  const bool use_peephole = peephole && has_peephole_term(gate);
  if (use_peephole) require(int(c.size()) == hidden, ErrorKind::shape, "c length mismatch");
  require_finite(x, "x_t");
  require_finite(h_prev, "h_prev");
  if (use_peephole) require_finite(c, "cell state");

  std::vector<float> out(hidden);
  for (int j = 0; j < hidden; ++j) {
    float acc = 0.0f;
    const auto wx = gw.forward.row(j);
    for (std::size_t k = 0; k < x.size(); ++k) acc += wx[k] * x[k];
    const auto wh = gw.recurrent.row(j);
    for (std::size_t k = 0; k < h_prev.size(); ++k) acc += wh[k] * h_prev[k];
    if (use_peephole) acc += gw.peephole[j] * c[j];
    acc += gw.bias[j];
    out[j] = acc;
  }
  return out;
}

CellState cell_step(const WeightSet& weights, std::span<const float> x, const CellState& prev,
                    const CellConfig& cfg) {
  const int hidden = weights.hidden_size();
  const auto pre_i = gate_preactivation(weights, Gate::input, cfg.peephole, x, prev.h, prev.c);
  const auto pre_f = gate_preactivation(weights, Gate::forget, cfg.peephole, x, prev.h, prev.c);
  const auto pre_g = gate_preactivation(weights, Gate::cell_updater, cfg.peephole, x, prev.h, prev.c);

  CellState next = CellState::zeros(hidden);
  for (int j = 0; j < hidden; ++j) {
    const float i = sigmoid(pre_i[j]);
    const float f = sigmoid(pre_f[j]);
    const float g = tanh_activation(pre_g[j]);
    next.c[j] = to_storage(f * prev.c[j] + i * g, cfg.precision);
  }
  // The output gate's peephole looks at the new cell state.
  const auto pre_o = gate_preactivation(weights, Gate::output, cfg.peephole, x, prev.h, next.c);
  for (int j = 0; j < hidden; ++j) {
    const float o = sigmoid(pre_o[j]);
    next.h[j] = to_storage(o * tanh_activation(next.c[j]), cfg.precision);
  }
  require_finite(next.c, "cell state");
  return next;
}

Sequence layer_infer(const LayerDescriptor& layer, const LayerWeights& weights,
                     const Sequence& input, Precision precision) {
  require(input.dim() == layer.input_size, ErrorKind::shape,
          "layer input has dimension " + std::to_string(input.dim()) + ", expected " +
              std::to_string(layer.input_size));
  require(int(weights.directions.size()) == layer.directions(), ErrorKind::shape,
          "wrong number of weight sets for layer direction");
  const int T = input.length();
  const int hidden = layer.hidden_size;
  const CellConfig cfg{layer.peephole, precision};

  Sequence out(T, layer.output_size());
  for (int d = 0; d < layer.directions(); ++d) {
    CellState state = CellState::zeros(hidden);
    for (int step = 0; step < T; ++step) {
      const int t = d == 0 ? step : T - 1 - step;
      state = cell_step(weights.directions[d], input.frame(t), state, cfg);
      std::copy(state.h.begin(), state.h.end(), out.frame(t).begin() + std::ptrdiff_t(d) * hidden);
    }
  }
  return out;
}

Sequence network_infer(const NetworkDescriptor& net, const NetworkWeights& weights,
                       const Sequence& input) {
  validate_weights(net, weights);
  require(input.length() >= 1, ErrorKind::shape, "input sequence is empty");
  Sequence x = to_storage(input, net.precision);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    try {
      x = layer_infer(net.layers[i], weights.layers[i], x, net.precision);
    } catch (const Error& e) {
      throw e.with_context("layer " + std::to_string(i));
    }
  }
  return x;
}

SequenceDiff compare_sequences(const Sequence& a, const Sequence& b) {
  require(a.dim() == b.dim() && a.length() == b.length(), ErrorKind::shape,
          "cannot compare sequences of different shapes");
  SequenceDiff d;
  const auto x = a.values();
  const auto y = b.values();
  d.identical = std::equal(x.begin(), x.end(), y.begin(), [](float p, float q) {
    return std::bit_cast<std::uint32_t>(p) == std::bit_cast<std::uint32_t>(q);
  });
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d.max_abs = std::max(d.max_abs, std::fabs(double(x[i]) - double(y[i])));
    dot += double(x[i]) * double(y[i]);
    nx += double(x[i]) * double(x[i]);
    ny += double(y[i]) * double(y[i]);
  }
  if (nx > 0.0 || ny > 0.0) d.cosine = nx > 0.0 && ny > 0.0 ? dot / std::sqrt(nx * ny) : 0.0;
  return d;
}

}  // namespace epur
