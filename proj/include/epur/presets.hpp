// SPDX-License-Identifier: Apache-2.0
//
// The five benchmark network shapes and a deterministic synthetic weight and
// input generator.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "epur/model.hpp"

namespace epur::presets {

struct PresetInfo {
  std::string name;
  int layers = 0;
  int neurons = 0;
  Direction direction = Direction::forward_only;
  bool peephole = false;
  int input_dim = 0;
  Precision precision = Precision::fp32;
  /// Published model size in MB.
  double published_mb = 0.0;
  /// Why input_dim and precision were chosen; the source does not give them.
  std::string assumption;
};

const std::vector<PresetInfo>& all();
const PresetInfo& info(std::string_view name);
NetworkDescriptor network(std::string_view name);
NetworkDescriptor network(const PresetInfo& p);

/// Total weight footprint in MiB.
double footprint_mib(const NetworkDescriptor& net);

/// Stacked layers of equal width; layer 0 reads input_dim values.
NetworkDescriptor stacked(std::string name, int input_dim, int layers, int hidden, Direction dir,
                          bool peephole, Precision precision = Precision::fp32);

/// Portable uniform floats from a 64-bit Mersenne twister: the top 24 bits of
/// each draw become a float in [0, 1), so streams match across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  float unit() { return float(gen_() >> 40) * 0x1p-24f; }
  float uniform(float lo, float hi) { return lo + (hi - lo) * unit(); }
  int uniform_int(int lo, int hi) { return lo + int(gen_() % std::uint64_t(hi - lo + 1)); }
  bool coin() { return (gen_() >> 63) != 0; }

 private:
  std::mt19937_64 gen_;
};

/// Matrices uniform in +-1/sqrt(N_x + N_h), so a gate preactivation has
/// roughly unit variance for inputs of unit magnitude; biases and peepholes
/// uniform in +-0.1. Values are rounded to the network precision.
NetworkWeights synthetic_weights(const NetworkDescriptor& net, std::uint64_t seed);

/// Frames uniform in [-1, 1], rounded to `p`.
Sequence synthetic_input(int T, int dim, std::uint64_t seed, Precision p = Precision::fp32);

}  // namespace epur::presets
