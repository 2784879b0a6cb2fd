// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "epur/model.hpp"
#include "epur/presets.hpp"

namespace epur::testing {

struct RandomCase {
  NetworkDescriptor net;
  NetworkWeights weights;
  Sequence input;
};

// 1-4 layers, hidden 8..64, T 1..16, peephole and direction per layer.
inline RandomCase random_case(std::uint64_t seed) {
  presets::Rng rng(seed * 0x9e3779b97f4a7c15ull + 1);
  RandomCase c;
  c.net.name = "random-" + std::to_string(seed);
  c.net.input_dim = rng.uniform_int(1, 48);
  int in = c.net.input_dim;
  const int layers = rng.uniform_int(1, 4);
  for (int l = 0; l < layers; ++l) {
    LayerDescriptor d;
    d.input_size = in;
    d.hidden_size = rng.uniform_int(8, 64);
    d.direction = rng.coin() ? Direction::bidirectional : Direction::forward_only;
    d.peephole = rng.coin();
    c.net.layers.push_back(d);
    in = d.output_size();
  }
  c.weights = presets::synthetic_weights(c.net, seed);
  c.input = presets::synthetic_input(rng.uniform_int(1, 16), c.net.input_dim, seed + 7);
  return c;
}

inline NetworkDescriptor single_layer(int input, int hidden, bool peephole = true,
                                      Direction dir = Direction::forward_only,
                                      Precision p = Precision::fp32) {
  return presets::stacked("layer", input, 1, hidden, dir, peephole, p);
}

}  // namespace epur::testing
