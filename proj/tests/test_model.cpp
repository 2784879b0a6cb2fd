// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "epur/model.hpp"
#include "epur/presets.hpp"
#include "support.hpp"

using namespace epur;

namespace {

// Independent reference: plain loops over the cell equations, one neuron at a time.
float dot_then(const Matrix& m, int row, const std::vector<float>& v, float acc) {
  for (int k = 0; k < m.cols(); ++k) acc += m.at(row, k) * v[std::size_t(k)];
  return acc;
}

float logistic(float x) { return 1.0f / (1.0f + std::exp(-x)); }

CellState oracle_cell(const WeightSet& w, const std::vector<float>& x, const CellState& prev,
                      bool peephole) {
  const int H = w.hidden_size();
  CellState out = CellState::zeros(H);
  auto pre = [&](Gate g, int j, const std::vector<float>& c) {
    const auto& gw = w[g];
    float acc = dot_then(gw.forward, j, x, 0.0f);
    acc = dot_then(gw.recurrent, j, prev.h, acc);
    if (peephole && g != Gate::cell_updater) acc += gw.peephole[std::size_t(j)] * c[std::size_t(j)];
    return acc + gw.bias[std::size_t(j)];
  };
  for (int j = 0; j < H; ++j) {
    const float i = logistic(pre(Gate::input, j, prev.c));
    const float f = logistic(pre(Gate::forget, j, prev.c));
    const float g = std::tanh(pre(Gate::cell_updater, j, prev.c));
    out.c[std::size_t(j)] = f * prev.c[std::size_t(j)] + i * g;
  }
  for (int j = 0; j < H; ++j) {
    const float o = logistic(pre(Gate::output, j, out.c));
    out.h[std::size_t(j)] = o * std::tanh(out.c[std::size_t(j)]);
  }
  return out;
}

bool same_bits(std::span<const float> a, std::span<const float> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](float p, float q) {
    return std::bit_cast<std::uint32_t>(p) == std::bit_cast<std::uint32_t>(q);
  });
}

WeightSet random_set(int in, int hidden, bool peephole, std::uint64_t seed) {
  auto net = testing::single_layer(in, hidden, peephole);
  return presets::synthetic_weights(net, seed).layers[0].directions[0];
}

std::vector<float> random_vec(presets::Rng& rng, int n, float lo, float hi) {
  std::vector<float> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("gate preactivation matches a naive matrix-vector oracle") {
  presets::Rng rng(11);
  const auto w = random_set(13, 9, true, 3);
  const auto x = random_vec(rng, 13, -1, 1);
  const auto h = random_vec(rng, 9, -1, 1);
  const auto c = random_vec(rng, 9, -2, 2);
  for (Gate g : kGates) {
    const auto got = gate_preactivation(w, g, true, x, h, c);
    for (int j = 0; j < 9; ++j) {
      double want = 0.0;
      for (int k = 0; k < 13; ++k) want += double(w[g].forward.at(j, k)) * x[std::size_t(k)];
      for (int k = 0; k < 9; ++k) want += double(w[g].recurrent.at(j, k)) * h[std::size_t(k)];
      if (has_peephole_term(g)) want += double(w[g].peephole[std::size_t(j)]) * c[std::size_t(j)];
      want += w[g].bias[std::size_t(j)];
      CHECK(got[std::size_t(j)] == doctest::Approx(want).epsilon(1e-5));
    }
  }
}

TEST_CASE("cell step equals the equation-by-equation oracle on random cells") {
  presets::Rng rng(42);
  for (int n = 0; n < 1000; ++n) {
    const int in = rng.uniform_int(1, 24);
    const int hidden = rng.uniform_int(1, 16);
    const bool peephole = rng.coin();
    const auto w = random_set(in, hidden, peephole, std::uint64_t(n) + 100);
    const auto x = random_vec(rng, in, -1, 1);
    CellState prev{random_vec(rng, hidden, -3, 3), random_vec(rng, hidden, -1, 1)};
    const auto got = cell_step(w, x, prev, {peephole, Precision::fp32});
    const auto want = oracle_cell(w, x, prev, peephole);
    REQUIRE(same_bits(got.c, want.c));
    REQUIRE(same_bits(got.h, want.h));
  }
}

TEST_CASE("open forget gate and closed input gate conserve the cell state") {
  auto w = WeightSet::zeros(4, 5, false);
  for (int j = 0; j < 5; ++j) {
    w[Gate::forget].bias[std::size_t(j)] = 100.0f;
    w[Gate::input].bias[std::size_t(j)] = -100.0f;
  }
  const std::vector<float> x = {0.3f, -0.2f, 0.9f, 1.0f};
  CellState prev{{0.5f, -1.5f, 2.0f, 0.0f, 7.0f}, std::vector<float>(5, 0.0f)};
  const auto next = cell_step(w, x, prev, {});
  for (int j = 0; j < 5; ++j) CHECK(next.c[std::size_t(j)] == prev.c[std::size_t(j)]);
}

TEST_CASE("activations and hidden state stay in range") {
  CHECK(sigmoid(0.0f) == 0.5f);
  CHECK(tanh_activation(0.0f) == 0.0f);
  for (float v = -60.0f; v <= 60.0f; v += 0.37f) {
    CHECK(sigmoid(v) >= 0.0f);
    CHECK(sigmoid(v) <= 1.0f);
    CHECK(std::fabs(tanh_activation(v)) <= 1.0f);
  }
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto c = testing::random_case(s);
    const auto y = network_infer(c.net, c.weights, c.input);
    for (float v : y.values()) CHECK(std::fabs(v) <= 1.0f);
  }
}

TEST_CASE("bidirectional output is the forward pass then the backward pass on the reversed input") {
  auto net = testing::single_layer(6, 7, true, Direction::bidirectional);
  const auto w = presets::synthetic_weights(net, 5);
  const auto x = presets::synthetic_input(9, 6, 8);
  const auto y = network_infer(net, w, x);
  REQUIRE(y.dim() == 14);

  LayerDescriptor fwd = net.layers[0];
  fwd.direction = Direction::forward_only;
  const auto yf = layer_infer(fwd, LayerWeights{{w.layers[0].directions[0]}}, x);
  Sequence rev(x.dim());
  for (int t = x.length() - 1; t >= 0; --t) rev.append(x.frame(t));
  const auto yb = layer_infer(fwd, LayerWeights{{w.layers[0].directions[1]}}, rev);
  for (int t = 0; t < 9; ++t) {
    CHECK(same_bits(y.frame(t).first(7), yf.frame(t)));
    CHECK(same_bits(y.frame(t).last(7), yb.frame(8 - t)));
  }
}

TEST_CASE("palindromic input with equal direction weights gives mirrored halves") {
  auto net = testing::single_layer(3, 4, true, Direction::bidirectional);
  auto w = presets::synthetic_weights(net, 9);
  w.layers[0].directions[1] = w.layers[0].directions[0];
  const auto half = presets::synthetic_input(4, 3, 2);
  Sequence x(3);
  for (int t = 0; t < 4; ++t) x.append(half.frame(t));
  for (int t = 3; t >= 0; --t) x.append(half.frame(t));
  const auto y = network_infer(net, w, x);
  const int T = x.length();
  for (int t = 0; t < T; ++t) CHECK(same_bits(y.frame(t).first(4), y.frame(T - 1 - t).last(4)));
}

TEST_CASE("without peepholes the result does not depend on peephole storage") {
  auto net = testing::single_layer(5, 6, false);
  const auto w = presets::synthetic_weights(net, 1);
  const auto x = presets::synthetic_input(5, 5, 1);
  auto with_peephole = net;
  with_peephole.layers[0].peephole = true;
  auto w2 = w;
  for (Gate g : kGates) {
    auto& gw = w2.layers[0].directions[0][g];
    if (has_peephole_term(g)) gw.peephole.assign(gw.bias.size(), 0.0f);
  }
  CHECK(same_bits(network_infer(net, w, x).values(), network_infer(with_peephole, w2, x).values()));
}

TEST_CASE("inference is deterministic") {
  const auto c = testing::random_case(77);
  const auto a = network_infer(c.net, c.weights, c.input);
  const auto b = network_infer(c.net, c.weights, c.input);
  CHECK(compare_sequences(a, b).identical);
}

TEST_CASE("fp16 networks keep stored values on the half grid") {
  auto net = testing::single_layer(8, 8, true, Direction::forward_only, Precision::fp16);
  const auto w = presets::synthetic_weights(net, 4);
  for (Gate g : kGates) {
    for (float v : w.layers[0].directions[0][g].forward.values()) CHECK(to_storage(v, Precision::fp16) == v);
  }
  const auto y = network_infer(net, w, presets::synthetic_input(6, 8, 4));
  for (float v : y.values()) CHECK(to_storage(v, Precision::fp16) == v);
}

TEST_CASE("EESEN-shaped network runs on 100 frames") {
  const auto net = presets::network("EESEN");
  const auto w = presets::synthetic_weights(net, 1);
  const auto y = network_infer(net, w, presets::synthetic_input(100, net.input_dim, 1));
  CHECK(y.length() == 100);
  CHECK(y.dim() == 640);
  for (float v : y.values()) REQUIRE(std::isfinite(v));
}

TEST_CASE("shape and numeric errors") {
  auto net = testing::single_layer(4, 4);
  const auto w = presets::synthetic_weights(net, 1);
  try {
    network_infer(net, w, presets::synthetic_input(3, 5, 1));
    FAIL("expected a shape error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::shape);
  }
  auto bad = presets::synthetic_input(3, 4, 1);
  bad.frame(1)[0] = std::numeric_limits<float>::infinity();
  try {
    network_infer(net, w, bad);
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numeric);
  }
  CHECK_THROWS_AS(compare_sequences(Sequence(2, 3), Sequence(3, 3)), Error);
}

TEST_CASE("footprint arithmetic") {
  LayerDescriptor l{3, 2, Direction::bidirectional, true};
  // 4 gates x (2x3 + 2x2 + 2) + 3 peepholes x 2
  CHECK(l.pass_values() == 4 * (6 + 4 + 2) + 3 * 2);
  NetworkDescriptor net;
  net.input_dim = 3;
  net.layers = {l};
  CHECK(net.total_weight_bytes() == 2 * l.pass_values() * 4);
}
