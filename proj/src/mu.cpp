// SPDX-License-Identifier: Apache-2.0
//
// The per-neuron operation graph of the four MUs. Ops are listed per gate in
// the row order of the MU step table; each op starts when all of its inputs
// are ready, so with unit latencies the start cycle equals the table stage.
#include <algorithm>

#include "epur/arch.hpp"

namespace epur::arch {

namespace {

class PlanBuilder {
 public:
  PlanBuilder(const HardwareConfig& cfg, bool peephole) : cfg_(cfg) { plan_.peephole = peephole; }

  int op(Gate unit, MuOpKind kind, std::string label, std::vector<int> deps = {}) {
    MuOp o{unit, kind, std::move(label), std::move(deps)};
    for (int d : o.deps) o.start = std::max(o.start, plan_.ops[std::size_t(d)].finish);
    o.finish = o.start + cfg_.latency.of(kind, cfg_.mu_comm_cycles);
    plan_.ops.push_back(std::move(o));
    return int(plan_.ops.size()) - 1;
  }

  // tanh(x) = (e^x - e^-x) / (e^x + e^-x), as the cell updater evaluates it.
  int tanh(Gate unit, const std::string& tag, int x) {
    const int neg = op(unit, MuOpKind::neg, tag + ".neg", {x});
    const int ep = op(unit, MuOpKind::exp, tag + ".exp_pos", {x});
    const int en = op(unit, MuOpKind::exp, tag + ".exp_neg", {neg});
    const int num = op(unit, MuOpKind::add, tag + ".sub", {ep, en});
    const int den = op(unit, MuOpKind::add, tag + ".add", {ep, en});
    return op(unit, MuOpKind::div, tag + ".div", {num, den});
  }

  // 1 / (1 + e^-x)
  int sigmoid(Gate unit, const std::string& tag, int x) {
    const int neg = op(unit, MuOpKind::neg, tag + ".neg", {x});
    const int e = op(unit, MuOpKind::exp, tag + ".exp", {neg});
    const int one = op(unit, MuOpKind::add, tag + ".add_one", {e});
    return op(unit, MuOpKind::div, tag + ".recip", {one});
  }

  MuPlan take() { return std::move(plan_); }

 private:
  const HardwareConfig& cfg_;
  MuPlan plan_;
};

}  // namespace

MuPlan mu_plan(const HardwareConfig& cfg, bool peephole) {
  cfg.validate();
  PlanBuilder b(cfg, peephole);

  std::array<int, 2> sent{};
  for (Gate g : {Gate::input, Gate::forget}) {
    const std::string n(to_string(g));
    int r0 = b.op(g, MuOpKind::move, n + ".load_dpu");
    if (peephole) {
      const int r1 = b.op(g, MuOpKind::mul, n + ".peephole");
      r0 = b.op(g, MuOpKind::add, n + ".add_peephole", {r0, r1});
    }
    r0 = b.op(g, MuOpKind::add, n + ".add_bias", {r0});
    r0 = b.sigmoid(g, n + ".sigmoid", r0);
    sent[std::size_t(gate_index(g))] = b.op(g, MuOpKind::comm, n + ".send", {r0});
  }

  const Gate cu = Gate::cell_updater;
  int g = b.op(cu, MuOpKind::add, "cell_updater.load_dpu_bias");
  g = b.tanh(cu, "cell_updater.tanh_g", g);
  const int ig = b.op(cu, MuOpKind::mul, "cell_updater.mul_i", {g, sent[0]});
  const int fc = b.op(cu, MuOpKind::mul, "cell_updater.mul_f", {sent[1]});
  const int c = b.op(cu, MuOpKind::add, "cell_updater.c_t", {ig, fc});
  int send_c = -1;
  if (peephole) send_c = b.op(cu, MuOpKind::comm, "cell_updater.send_c", {c});
  const int phi = b.tanh(cu, "cell_updater.tanh_c", c);
  const int send_phi = b.op(cu, MuOpKind::comm, "cell_updater.send_phi", {phi});

  const Gate og = Gate::output;
  int o = b.op(og, MuOpKind::add, "output.load_dpu_bias");
  if (peephole) {
    const int r1 = b.op(og, MuOpKind::mul, "output.peephole", {send_c});
    o = b.op(og, MuOpKind::add, "output.add_peephole", {o, r1});
  }
  o = b.sigmoid(og, "output.sigmoid", o);
  const int r1 = b.op(og, MuOpKind::move, "output.load_phi", {send_phi});
  b.op(og, MuOpKind::mul, "output.h_t", {o, r1});
  return b.take();
}

int MuPlan::finish(Gate g) const {
  int f = 0;
  for (const auto& o : ops) {
    if (o.unit == g) f = std::max(f, o.finish);
  }
  return f;
}

int MuPlan::latency() const { return finish(Gate::output); }

int MuPlan::ops_for(Gate g) const {
  return int(std::count_if(ops.begin(), ops.end(), [g](const MuOp& o) { return o.unit == g; }));
}

const MuOp& MuPlan::find(std::string_view label) const {
  for (const auto& o : ops) {
    if (o.label == label) return o;
  }
  fail(ErrorKind::invariant, "no MU op labelled '" + std::string(label) + "'");
}

MuSchedule mu_schedule(Gate gate, const HardwareConfig& cfg, bool peephole) {
  require(gate_index(gate) >= 0 && gate_index(gate) < 4, ErrorKind::config,
          "unknown gate id " + std::to_string(gate_index(gate)));
  const MuPlan plan = mu_plan(cfg, peephole);
  MuSchedule s{gate, {}, 0, 0, 0};
  for (const auto& o : plan.ops) {
    if (o.unit == gate) s.ops.push_back(o);
  }
  s.first_start = s.ops.front().start;
  for (const auto& o : s.ops) {
    s.first_start = std::min(s.first_start, o.start);
    s.last_start = std::max(s.last_start, o.start);
    s.critical_path = std::max(s.critical_path, o.finish);
  }
  return s;
}

}  // namespace epur::arch
