// SPDX-License-Identifier: Apache-2.0
//
// Linear quantization of the partial gate outputs produced by the forward
// phase of the weight-locality schedule, and the lookup table that turns the
// integer codes back into floats.
#pragma once

#include <cstdint>
#include <vector>

#include "epur/model.hpp"

namespace epur {

/// Clamp magnitude used when no calibration pass is run.
inline constexpr float kDefaultAlpha = 20.0f;

struct QuantConfig {
  int n_bits = 8;
  float alpha = kDefaultAlpha;
  float beta = 0.0f;  // (2^(n-1) - 1) / alpha

  /// Validates n_bits in [2, 16] and alpha > 0, then derives beta.
  static QuantConfig make(int n_bits, float alpha);

  std::int32_t max_code() const { return (std::int32_t{1} << (n_bits - 1)) - 1; }
  /// Size of one stored code, rounded up to whole bytes.
  std::size_t code_bytes() const { return std::size_t((n_bits + 7) / 8); }
  float step() const { return 1.0f / beta; }
};

/// round(beta * o), half away from zero, saturated to the symmetric code range.
std::int32_t quantize(float o, const QuantConfig& cfg);

class DequantTable {
 public:
  explicit DequantTable(const QuantConfig& cfg);

  float operator()(std::int32_t code) const;
  const QuantConfig& config() const { return cfg_; }
  std::size_t size() const { return entries_.size(); }

 private:
  QuantConfig cfg_;
  std::vector<float> entries_;  // index = code + max_code
};

float dequantize(std::int32_t code, const DequantTable& table);

/// Largest |W_gx . x_t| over every gate, direction, layer and timestep of a
/// reference run on a calibration sequence.
float max_abs_forward_partial(const NetworkDescriptor& net, const NetworkWeights& weights,
                              const Sequence& calibration);

/// Calibrated alpha: the maximum partial rounded up to one decimal.
float calibrate_alpha(const NetworkDescriptor& net, const NetworkWeights& weights,
                      const Sequence& calibration);

}  // namespace epur
