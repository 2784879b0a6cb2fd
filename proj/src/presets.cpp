// SPDX-License-Identifier: Apache-2.0
#include "epur/presets.hpp"

#include <cmath>

namespace epur::presets {

const std::vector<PresetInfo>& all() {
  static const std::vector<PresetInfo> table = {
      {"BYSDNE", 5, 512, Direction::forward_only, true, 512, Precision::fp32, 40.0,
       "input_dim = hidden (512), fp32"},
      {"RLDRADSPR", 10, 1024, Direction::forward_only, true, 1024, Precision::fp16, 118.0,
       "input_dim = hidden (1024), fp16 so one layer fits 4 MiB per CU"},
      {"EESEN", 5, 320, Direction::bidirectional, true, 120, Precision::fp32, 42.0,
       "input_dim 120 (40 filterbank features with deltas), fp32"},
      {"LDLRNN", 2, 128, Direction::forward_only, false, 128, Precision::fp32, 1.0,
       "input_dim = hidden (128), fp32"},
      {"GMAT", 17, 1024, Direction::forward_only, false, 1024, Precision::fp16, 272.0,
       "stacked-LSTM shape only, input_dim = hidden (1024), fp16"},
  };
  return table;
}

const PresetInfo& info(std::string_view name) {
  for (const auto& p : all()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const auto& p : all()) known += (known.empty() ? "" : ", ") + p.name;
  fail(ErrorKind::config, "unknown network preset '" + std::string(name) + "' (known: " + known + ")");
}

NetworkDescriptor stacked(std::string name, int input_dim, int layers, int hidden, Direction dir,
                          bool peephole, Precision precision) {
  NetworkDescriptor net;
  net.name = std::move(name);
  net.input_dim = input_dim;
  net.precision = precision;
  int in = input_dim;
  for (int i = 0; i < layers; ++i) {
    LayerDescriptor l{in, hidden, dir, peephole};
    net.layers.push_back(l);
    in = l.output_size();
  }
  net.validate();
  return net;
}

NetworkDescriptor network(const PresetInfo& p) {
  return stacked(p.name, p.input_dim, p.layers, p.neurons, p.direction, p.peephole, p.precision);
}

NetworkDescriptor network(std::string_view name) { return network(info(name)); }

double footprint_mib(const NetworkDescriptor& net) {
  return double(net.total_weight_bytes()) / (1024.0 * 1024.0);
}

NetworkWeights synthetic_weights(const NetworkDescriptor& net, std::uint64_t seed) {
  net.validate();
  Rng rng(seed);
  const Precision p = net.precision;
  NetworkWeights w;
  for (const auto& layer : net.layers) {
    const float scale = 1.0f / std::sqrt(float(layer.input_size + layer.hidden_size));
    LayerWeights lw;
    for (int d = 0; d < layer.directions(); ++d) {
      auto ws = WeightSet::zeros(layer.input_size, layer.hidden_size, layer.peephole);
      for (Gate g : kGates) {
        auto& gw = ws[g];
        for (float& v : gw.forward.values()) v = to_storage(rng.uniform(-scale, scale), p);
        for (float& v : gw.recurrent.values()) v = to_storage(rng.uniform(-scale, scale), p);
        for (float& v : gw.bias) v = to_storage(rng.uniform(-0.1f, 0.1f), p);
        for (float& v : gw.peephole) v = to_storage(rng.uniform(-0.1f, 0.1f), p);
      }
      lw.directions.push_back(std::move(ws));
    }
    w.layers.push_back(std::move(lw));
  }
  return w;
}

Sequence synthetic_input(int T, int dim, std::uint64_t seed, Precision p) {
  require(T >= 1 && dim >= 1, ErrorKind::shape, "synthetic input needs T >= 1 and dim >= 1");
  Rng rng(seed);
  Sequence s(T, dim);
  for (float& v : s.values()) v = to_storage(rng.uniform(-1.0f, 1.0f), p);
  return s;
}

}  // namespace epur::presets
