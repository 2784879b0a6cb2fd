// SPDX-License-Identifier: Apache-2.0
#include "epur/quant.hpp"

#include <algorithm>
#include <cmath>

namespace epur {

QuantConfig QuantConfig::make(int n_bits, float alpha) {
  require(n_bits >= 2 && n_bits <= 16, ErrorKind::config,
          "n_bits must be in [2, 16], got " + std::to_string(n_bits));
  require(std::isfinite(alpha) && alpha > 0.0f, ErrorKind::config, "alpha must be positive");
  QuantConfig cfg;
  cfg.n_bits = n_bits;
  cfg.alpha = alpha;
  cfg.beta = static_cast<float>(cfg.max_code()) / alpha;
  return cfg;
}

std::int32_t quantize(float o, const QuantConfig& cfg) {
  if (!std::isfinite(o)) fail(ErrorKind::numeric, "cannot quantize a non-finite value");
  const float scaled = std::round(cfg.beta * o);
  const float limit = static_cast<float>(cfg.max_code());
  return static_cast<std::int32_t>(std::clamp(scaled, -limit, limit));
}

DequantTable::DequantTable(const QuantConfig& cfg) : cfg_(cfg) {
  const std::int32_t m = cfg.max_code();
  entries_.reserve(std::size_t(2 * m + 1));
  for (std::int32_t code = -m; code <= m; ++code) {
    entries_.push_back(static_cast<float>(code) / cfg.beta);
  }
}

float DequantTable::operator()(std::int32_t code) const {
  const std::int32_t m = cfg_.max_code();
  if (code < -m || code > m) {
    fail(ErrorKind::range, "code " + std::to_string(code) + " outside [-" + std::to_string(m) +
                               ", " + std::to_string(m) + "]");
  }
  return entries_[std::size_t(code + m)];
}

float dequantize(std::int32_t code, const DequantTable& table) { return table(code); }

float max_abs_forward_partial(const NetworkDescriptor& net, const NetworkWeights& weights,
                              const Sequence& calibration) {
  validate_weights(net, weights);
  float best = 0.0f;
  Sequence x = to_storage(calibration, net.precision);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    require(x.dim() == layer.input_size, ErrorKind::shape, "calibration input dimension mismatch");
    for (const auto& ws : weights.layers[l].directions) {
      for (Gate g : kGates) {
        const auto& m = ws[g].forward;
        for (int t = 0; t < x.length(); ++t) {
          const auto frame = x.frame(t);
          for (int j = 0; j < m.rows(); ++j) {
            const auto row = m.row(j);
            float acc = 0.0f;
            for (std::size_t k = 0; k < frame.size(); ++k) acc += row[k] * frame[k];
            best = std::max(best, std::fabs(acc));
          }
        }
      }
    }
    x = layer_infer(layer, weights.layers[l], x, net.precision);
  }
  return best;
}

float calibrate_alpha(const NetworkDescriptor& net, const NetworkWeights& weights,
                      const Sequence& calibration) {
  const float peak = max_abs_forward_partial(net, weights, calibration);
  const float alpha = std::ceil(peak * 10.0f) / 10.0f;
  // Round-off in the ceil can land just under the peak.
  return std::max(alpha < peak ? alpha + 0.1f : alpha, 0.1f);
}

}  // namespace epur
