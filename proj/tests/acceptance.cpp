// SPDX-License-Identifier: Apache-2.0
//
// One line per acceptance criterion; exit status is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "epur/arch.hpp"
#include "epur/energy.hpp"
#include "epur/presets.hpp"
#include "epur/quant.hpp"
#include "epur/sched.hpp"
#include "support.hpp"

using namespace epur;
using arch::HardwareConfig;
using sched::Access;
using sched::ObjectKind;
using sched::Policy;
using sched::Target;

namespace {

// Pinned tolerances.
constexpr int kSuiteSize = 200;
constexpr double kSuiteSeconds = 60.0;
constexpr double kMinCosine = 0.999;
constexpr double kEesenSizeTolerance = 0.02;  // relative to the published 42 MB
constexpr double kLeakageTolerance = 0.02;    // weight-memory leakage energy vs 0.5
constexpr double kBandwidthFactor = 3.0;      // order of magnitude around 4.2 MB/s
constexpr double kPublishedBandwidth = 4.2e6;
constexpr double kPublishedSingleLayerRatio = 7.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s  %2d  %-34s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

arch::SimOptions options(Policy p, bool functional = true) {
  arch::SimOptions o;
  o.policy = p;
  o.functional = functional;
  return o;
}

std::vector<testing::RandomCase> suite() {
  std::vector<testing::RandomCase> v;
  for (int s = 0; s < kSuiteSize; ++s) v.push_back(testing::random_case(std::uint64_t(s)));
  return v;
}

std::uint64_t weight_reads(const std::vector<sched::AccessTrace>& traces) {
  std::uint64_t b = 0;
  for (const auto& t : traces) b += sched::count_accesses(t.events).at(Target::weight_buffer, Access::read).bytes;
  return b;
}

double ulp(float v) {
  const float a = std::fabs(v);
  return double(std::nextafter(a, std::numeric_limits<float>::infinity()) - a);
}

}  // namespace

int main() {
  const auto cases = suite();
  const auto epur_hw = HardwareConfig::preset("epur");
  const auto mwl_hw = HardwareConfig::preset("epur-mwl");

  report(1, "functional oracle equivalence", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    int bad = 0, bidir = 0, peephole = 0;
    for (const auto& c : cases) {
      const auto r = arch::simulate(c.net, c.weights, c.input, epur_hw, options(Policy::conventional));
      if (!compare_sequences(*r.outputs, network_infer(c.net, c.weights, c.input)).identical) ++bad;
      for (const auto& l : c.net.layers) {
        bidir += l.direction == Direction::bidirectional;
        peephole += l.peephole;
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return Outcome{bad == 0 && secs < kSuiteSeconds && bidir > 0 && peephole > 0,
                   fmt("%d networks, %d mismatches, %.1f s (limit %.0f s)", kSuiteSize, bad, secs,
                       kSuiteSeconds)};
  });

  report(2, "schedule equivalence", [&] {
    int bad = 0;
    for (const auto& c : cases) {
      const auto a = arch::simulate(c.net, c.weights, c.input, epur_hw, options(Policy::conventional));
      const auto b = arch::simulate(c.net, c.weights, c.input, epur_hw, options(Policy::mwl));
      if (!compare_sequences(*a.outputs, *b.outputs).identical) ++bad;
    }
    return Outcome{bad == 0, fmt("%d networks, %d mismatches between mwl and conventional", kSuiteSize, bad)};
  });

  report(3, "weight-buffer access identity", [&] {
    bool ok = true;
    std::string d;
    for (int n : {64, 320}) {
      for (int T : {1, 10, 100}) {
        const LayerDescriptor l{n, n, Direction::forward_only, true};
        const auto conv = weight_reads(sched::trace_conventional(l, Precision::fp32, T));
        const auto mwl = weight_reads(sched::trace_mwl(l, Precision::fp32, T, 1));
        ok = ok && mwl * std::uint64_t(2 * T) == conv * std::uint64_t(1 + T);
        if (n == 64) d += fmt("T=%d %.4f ", T, double(mwl) / double(conv));
      }
    }
    return Outcome{ok, d + "== (1+T)/(2T) exactly"};
  });

  report(4, "reuse distances", [&] {
    bool ok = true;
    std::string d;
    struct Shape { int nx, nh; Precision p; };
    for (const auto& s : {Shape{640, 320, Precision::fp32}, Shape{120, 320, Precision::fp32},
                          Shape{1024, 1024, Precision::fp16}, Shape{48, 48, Precision::fp32}}) {
      const LayerDescriptor l{s.nx, s.nh, Direction::forward_only, true};
      const std::uint64_t e = element_bytes(s.p);
      const std::uint64_t wx = std::uint64_t(s.nx) * s.nh * e, wh = std::uint64_t(s.nh) * s.nh * e;
      const std::uint64_t row = std::uint64_t(s.nx) * e;
      const auto conv = sched::reuse_analysis(sched::trace_conventional(l, s.p, 3)[0].events);
      const auto mwl = sched::reuse_analysis(sched::trace_mwl(l, s.p, 3, 1)[0].events);
      for (std::uint8_t u = 0; u < 4; ++u) {
        ok = ok && conv.stream(u, Target::weight_buffer).max_reuse_distance == wx + wh;
        ok = ok && mwl.object_class(u, Target::row_buffer, ObjectKind::forward_row).max_reuse_distance == row;
        ok = ok && mwl.object_class(u, Target::weight_buffer, ObjectKind::recurrent_row).max_reuse_distance == wh;
      }
      if (s.nx == 640)
        d = fmt("640x320: conventional %llu B, mwl forward %llu B, mwl recurrent %llu B",
                (unsigned long long)conv.stream(0, Target::weight_buffer).max_reuse_distance,
                (unsigned long long)mwl.object_class(0, Target::row_buffer, ObjectKind::forward_row).max_reuse_distance,
                (unsigned long long)mwl.object_class(0, Target::weight_buffer, ObjectKind::recurrent_row).max_reuse_distance);
    }
    return Outcome{ok, d};
  });

  report(5, "minimum weight storage", [&] {
    bool ok = true;
    double worst = 0.0;
    for (int n : {32, 128, 320, 1000}) {
      const LayerDescriptor l{n, n, Direction::forward_only, true};
      const std::uint64_t row = std::uint64_t(n) * 4, wh = std::uint64_t(n) * n * 4;
      const auto conv = sched::reuse_analysis(sched::trace_conventional(l, Precision::fp32, 2)[0].events);
      const auto mwl = sched::reuse_analysis(sched::trace_mwl(l, Precision::fp32, 2, 1)[0].events);
      for (std::uint8_t u = 0; u < 4; ++u) {
        const auto m = mwl.min_weight_storage(u), c = conv.min_weight_storage(u);
        ok = ok && m == wh + row && 2 * m <= c + 2 * row;
        worst = std::max(worst, double(m) / double(c));
      }
      const auto net = testing::single_layer(n, n);
      const auto hw = arch::simulate(net, nullptr, nullptr, 2, epur_hw, options(Policy::mwl, false)).high_water;
      ok = ok && hw.weight_buffer_per_cu + hw.row_buffer_per_cu == wh + row;
    }
    return Outcome{ok, fmt("mwl/conventional per gate at most %.4f (bytes(W_gh) + one row)", worst)};
  });

  report(6, "single-layer-on-chip ratio", [&] {
    bool ok = true;
    double log_sum = 0.0;
    std::string d;
    for (const auto& p : presets::all()) {
      // Analytic: stored values per pass from the shape alone.
      auto pass = [&](std::uint64_t in) {
        const std::uint64_t h = std::uint64_t(p.neurons);
        return 4 * (h * in + h * h + h) + (p.peephole ? 3 * h : 0);
      };
      const std::uint64_t dirs = p.direction == Direction::bidirectional ? 2 : 1;
      const std::uint64_t first = pass(std::uint64_t(p.input_dim));
      const std::uint64_t rest = pass(dirs * std::uint64_t(p.neurons));
      const std::uint64_t total = dirs * (first + std::uint64_t(p.layers - 1) * rest);
      const double analytic = double(total) / double(p.layers > 1 ? std::max(first, rest) : first);
      const auto net = presets::network(p);
      const double tool = double(net.total_weight_bytes()) / double(net.max_pass_weight_bytes());
      ok = ok && tool == analytic;
      log_sum += std::log(tool);
      d += fmt("%s %.2f ", p.name.c_str(), tool);
    }
    const double gm = std::exp(log_sum / double(presets::all().size()));
    return Outcome{ok, d + fmt("geomean %.2fx (published %.0fx)", gm, kPublishedSingleLayerRatio)};
  });

  report(7, "DRAM traffic invariance", [&] {
    const auto net = presets::network("EESEN");
    const auto a = arch::simulate(net, nullptr, nullptr, 10, epur_hw, options(Policy::conventional, false));
    const auto b = arch::simulate(net, nullptr, nullptr, 200, epur_hw, options(Policy::conventional, false));
    const auto c = arch::simulate(net, nullptr, nullptr, 50, mwl_hw, options(Policy::mwl, false));
    bool ok = a.dram.passes.size() == b.dram.passes.size() && a.dram.passes.size() == c.dram.passes.size();
    for (std::size_t i = 0; ok && i < a.dram.passes.size(); ++i)
      ok = a.dram.passes[i].weight_bytes == b.dram.passes[i].weight_bytes &&
           a.dram.passes[i].weight_bytes == c.dram.passes[i].weight_bytes;
    const double mib = double(a.dram.weight_bytes) / double(arch::MiB);
    const double dev = mib / 42.0 - 1.0;
    ok = ok && std::fabs(dev) <= kEesenSizeTolerance;
    return Outcome{ok, fmt("EESEN weights per inference %.2f MiB vs published 42 MB (%+.1f%%, limit %.0f%%)",
                           mib, 100.0 * dev, 100.0 * kEesenSizeTolerance)};
  });

  report(8, "quantization bounds", [&] {
    const auto q = QuantConfig::make(8, kDefaultAlpha);
    const DequantTable table(q);
    const double half_step = 0.5 / double(q.beta);
    bool ok = table.size() == 255;
    for (std::int32_t code = -127; code <= 127; ++code) {
      const float v = table(code);
      ok = ok && quantize(v, q) == code && table(-code) == -v;
      if (code > -127) ok = ok && v > table(code - 1);
    }
    presets::Rng rng(2024);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const float o = rng.uniform(-q.alpha, q.alpha);
      const double err = std::fabs(double(table(quantize(o, q))) - double(o));
      ok = ok && err <= half_step + ulp(o) && quantize(-o, q) == -quantize(o, q);
      worst = std::max(worst, err);
    }
    double min_cos = 1.0;
    for (std::size_t s = 0; s < cases.size(); ++s) {
      const auto& c = cases[s];
      const auto calibration = presets::synthetic_input(16, c.net.input_dim, 10000 + s);
      auto o = options(Policy::mwl);
      o.quantize = true;
      o.quant = QuantConfig::make(8, calibrate_alpha(c.net, c.weights, calibration));
      const auto r = arch::simulate(c.net, c.weights, c.input, epur_hw, o);
      min_cos = std::min(min_cos, compare_sequences(*r.outputs, network_infer(c.net, c.weights, c.input)).cosine);
    }
    ok = ok && min_cos >= kMinCosine;
    return Outcome{ok, fmt("worst round trip %.5f <= %.5f; min cosine %.6f over %d networks (limit %.3f)",
                           worst, half_step, min_cos, kSuiteSize, kMinCosine)};
  });

  report(9, "timing model", [&] {
    bool ok = arch::dpu_dot_cycles(320, epur_hw) == 30;
    auto unit = epur_hw;
    unit.latency = {1, 1, 1, 1, 1, 1};
    unit.mu_comm_cycles = 1;
    const auto plan = arch::mu_plan(unit, true);
    ok = ok && plan.finish(Gate::input) == 8 && plan.finish(Gate::forget) == 8;
    ok = ok && plan.find("output.h_t").start == 17 && plan.latency() == 18;
    const int table4 = arch::mu_plan(epur_hw, true).latency();
    for (const auto& p : presets::all()) {
      const auto net = presets::network(p);
      arch::simulate(net, nullptr, nullptr, 20, epur_hw, options(Policy::conventional, false));
      auto o = options(Policy::mwl, false);
      o.quantize = true;
      arch::simulate(net, nullptr, nullptr, 20, mwl_hw, o);
    }
    auto slow = epur_hw;
    slow.mu_initiation_interval = 64;
    bool flagged = false;
    try {
      arch::simulate(testing::single_layer(32, 32), nullptr, nullptr, 2, slow, options(Policy::conventional, false));
    } catch (const Error& e) {
      flagged = e.kind() == ErrorKind::invariant;
    }
    ok = ok && flagged;
    return Outcome{ok, fmt("dot(320)=30, unit MU input 0-7 h_t at 17, default MU latency %d, "
                           "no MU bottleneck on 5 presets, slow MU flagged",
                           table4)};
  });

  report(10, "energy model properties", [&] {
    const auto table = energy::EnergyTable::defaults();
    bool ok = energy::account(arch::SimReport{}, table, epur_hw).total == 0.0;

    const auto net = presets::network("EESEN");
    const int T = 50;
    auto conv_cfg = epur_hw, mwl_cfg = mwl_hw;
    conv_cfg.power_gating = mwl_cfg.power_gating = false;
    const auto sa = arch::simulate(net, nullptr, nullptr, T, conv_cfg, options(Policy::conventional, false));
    auto mo = options(Policy::mwl, false);
    mo.quantize = true;
    const auto sb = arch::simulate(net, nullptr, nullptr, T, mwl_cfg, mo);

    auto doubled = sa;
    for (auto& row : doubled.counts.by)
      for (auto& c : row) c.bytes *= 2;
    doubled.dpu_subvector_ops *= 2;
    doubled.mu_ops *= 2;
    const auto ea = energy::account(sa, table, conv_cfg);
    ok = ok && energy::account(doubled, table, conv_cfg).dynamic_total == 2.0 * ea.dynamic_total;

    auto moved = sa;
    moved.counts.at(Target::dram, Access::read).bytes -= 4096;
    moved.counts.at(Target::weight_buffer, Access::read).bytes += 4096;
    ok = ok && energy::account(moved, table, conv_cfg).total < ea.total;

    const auto eb = energy::account(sb, table, mwl_cfg);
    const double power_ratio = double(eb.powered_bytes.at("weight_buffer")) /
                               double(ea.powered_bytes.at("weight_buffer"));
    const double energy_ratio =
        eb.leakage_by_component.at("weight_buffer") / ea.leakage_by_component.at("weight_buffer");
    ok = ok && power_ratio == 0.5 && std::fabs(energy_ratio - 0.5) <= kLeakageTolerance;

    const auto ga = energy::account(sa, table, epur_hw), gb = energy::account(sb, table, mwl_hw);
    const double gated = gb.leakage_by_component.at("weight_buffer") / ga.leakage_by_component.at("weight_buffer");
    return Outcome{ok, fmt("linear, empty run 0 J, DRAM dearer; weight-memory leakage power %.3f, "
                           "energy %.4f over EESEN T=%d (limit 0.5+-%.2f; %.3f with bank gating)",
                           power_ratio, energy_ratio, T, kLeakageTolerance, gated)};
  });

  report(11, "bandwidth sanity", [&] {
    auto o = options(Policy::conventional, false);
    o.frames_per_second = 100.0;
    const auto r = arch::simulate(presets::network("EESEN"), nullptr, nullptr, 1000, epur_hw, o);
    const double bw = r.realtime_dram_bandwidth;
    const bool ok = bw >= kPublishedBandwidth / kBandwidthFactor && bw <= kPublishedBandwidth * kBandwidthFactor &&
                    r.realtime_ok;
    return Outcome{ok, fmt("EESEN 1000 frames at 100 frames/s: %.2f MB/s (published 4.2 MB/s, "
                           "limit x%.0f), %.3f s of compute for %.0f s of audio",
                           bw / 1e6, kBandwidthFactor, r.seconds, r.realtime_seconds)};
  });

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
