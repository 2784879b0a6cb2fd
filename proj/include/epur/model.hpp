// SPDX-License-Identifier: Apache-2.0
//
// LSTM network description and the reference inference engine. Everything in
// here is independent of the accelerator model; the simulator's functional
// datapath is checked against these functions bit for bit.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epur/error.hpp"

namespace epur {

enum class Precision { fp32, fp16 };
enum class Direction { forward_only, bidirectional };

/// The four gates, in the order used by the weight blob and by the CU ids.
enum class Gate : std::uint8_t { input = 0, forget = 1, cell_updater = 2, output = 3 };

inline constexpr std::array<Gate, 4> kGates = {Gate::input, Gate::forget, Gate::cell_updater,
                                               Gate::output};

std::string_view to_string(Precision p);
std::string_view to_string(Direction d);
std::string_view to_string(Gate g);
Precision parse_precision(std::string_view s);
Direction parse_direction(std::string_view s);
Gate parse_gate(std::string_view s);

inline constexpr int gate_index(Gate g) { return static_cast<int>(g); }
inline constexpr bool has_peephole_term(Gate g) { return g != Gate::cell_updater; }

/// Bytes used to store one weight/activation value.
std::size_t element_bytes(Precision p);

/// Rounds a value to the storage format (identity for fp32).
float to_storage(float v, Precision p);

struct LayerDescriptor {
  int input_size = 0;
  int hidden_size = 0;
  Direction direction = Direction::forward_only;
  bool peephole = false;

  int directions() const { return direction == Direction::bidirectional ? 2 : 1; }
  int output_size() const { return hidden_size * directions(); }

  /// Number of stored values for one direction (matrices, biases, peepholes).
  std::uint64_t pass_values() const;
  /// Number of values in the two weight matrices of one gate.
  std::uint64_t gate_matrix_values() const;
};

struct NetworkDescriptor {
  std::string name = "network";
  int input_dim = 0;
  Precision precision = Precision::fp32;
  std::vector<LayerDescriptor> layers;
  /// Classes of the softmax output layer; 0 means not modelled. Only its weight
  /// traffic is accounted, its arithmetic is out of scope.
  int output_classes = 0;

  void validate() const;
  int output_dim() const { return layers.empty() ? 0 : layers.back().output_size(); }
  std::size_t element_size() const { return element_bytes(precision); }

  std::uint64_t total_weight_bytes() const;
  /// Weight bytes of a single pass (one direction of one layer).
  std::uint64_t pass_weight_bytes(std::size_t layer) const;
  std::uint64_t max_pass_weight_bytes() const;
  std::uint64_t softmax_weight_bytes() const;
};

/// Row-major matrix; one row holds one neuron's weights.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(std::size_t(rows) * cols, 0.0f) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::span<const float> row(int r) const {
    return {data_.data() + std::size_t(r) * cols_, std::size_t(cols_)};
  }
  std::span<float> row(int r) { return {data_.data() + std::size_t(r) * cols_, std::size_t(cols_)}; }
  float& at(int r, int c) { return data_[std::size_t(r) * cols_ + c]; }
  float at(int r, int c) const { return data_[std::size_t(r) * cols_ + c]; }
  std::span<const float> values() const { return data_; }
  std::span<float> values() { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<float> data_;
};

struct GateWeights {
  Matrix forward;    // hidden x input
  Matrix recurrent;  // hidden x hidden
  std::vector<float> bias;
  /// Empty for the cell updater and for layers without peepholes.
  std::vector<float> peephole;

  bool operator==(const GateWeights&) const = default;
};

/// Weights of one LSTM cell (one direction of one layer).
struct WeightSet {
  std::array<GateWeights, 4> gates;

  GateWeights& operator[](Gate g) { return gates[gate_index(g)]; }
  const GateWeights& operator[](Gate g) const { return gates[gate_index(g)]; }

  int input_size() const { return gates[0].forward.cols(); }
  int hidden_size() const { return gates[0].forward.rows(); }

  static WeightSet zeros(int input_size, int hidden_size, bool peephole);
  void validate(const LayerDescriptor& layer) const;

  bool operator==(const WeightSet&) const = default;
};

struct LayerWeights {
  std::vector<WeightSet> directions;  // [forward] or [forward, backward]
  bool operator==(const LayerWeights&) const = default;
};

struct NetworkWeights {
  std::vector<LayerWeights> layers;
  bool operator==(const NetworkWeights&) const = default;
};

void validate_weights(const NetworkDescriptor& net, const NetworkWeights& weights);

struct CellState {
  std::vector<float> c;
  std::vector<float> h;

  static CellState zeros(int hidden_size) {
    return {std::vector<float>(hidden_size, 0.0f), std::vector<float>(hidden_size, 0.0f)};
  }
};

/// T frames of equal dimension, stored contiguously.
class Sequence {
 public:
  Sequence() = default;
  explicit Sequence(int dim) : dim_(dim) {}
  Sequence(int length, int dim) : dim_(dim), data_(std::size_t(length) * dim, 0.0f) {}

  int dim() const { return dim_; }
  int length() const { return dim_ == 0 ? 0 : int(data_.size() / std::size_t(dim_)); }
  std::span<const float> frame(int t) const {
    return {data_.data() + std::size_t(t) * dim_, std::size_t(dim_)};
  }
  std::span<float> frame(int t) { return {data_.data() + std::size_t(t) * dim_, std::size_t(dim_)}; }
  void append(std::span<const float> frame);
  std::span<const float> values() const { return data_; }
  std::span<float> values() { return data_; }

  bool operator==(const Sequence&) const = default;

 private:
  int dim_ = 0;
  std::vector<float> data_;
};

struct CellConfig {
  bool peephole = false;
  Precision precision = Precision::fp32;
};

float sigmoid(float x);
float tanh_activation(float x);

/// W_gx.x + W_gh.h + peephole.c + b for every neuron of one gate. The sum for a
/// neuron is accumulated left to right in single precision: forward products
/// in index order, then recurrent products, then the peephole term, then the
/// bias.
std::vector<float> gate_preactivation(const WeightSet& weights, Gate gate, bool peephole,
                                      std::span<const float> x, std::span<const float> h_prev,
                                      std::span<const float> c);

CellState cell_step(const WeightSet& weights, std::span<const float> x, const CellState& prev,
                    const CellConfig& cfg);

/// Runs one layer over a sequence, all directions starting from zero state.
Sequence layer_infer(const LayerDescriptor& layer, const LayerWeights& weights,
                     const Sequence& input, Precision precision = Precision::fp32);

/// Applies every layer in turn. The softmax output layer is not evaluated.
Sequence network_infer(const NetworkDescriptor& net, const NetworkWeights& weights,
                       const Sequence& input);

/// Input frames rounded to the network's storage precision.
Sequence to_storage(const Sequence& s, Precision p);

void require_finite(std::span<const float> v, std::string_view what);

struct SequenceDiff {
  bool identical = false;  // same shape and bit-identical values
  double max_abs = 0.0;
  /// Cosine similarity of the flattened sequences; 1 when both are all zero.
  double cosine = 1.0;
};

SequenceDiff compare_sequences(const Sequence& a, const Sequence& b);

}  // namespace epur
