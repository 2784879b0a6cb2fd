// SPDX-License-Identifier: Apache-2.0
#include "epur/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace epur::report {

using sched::Access;
using sched::Target;

std::string Table::render() const {
  std::vector<std::size_t> width(header_.size(), 0);
  auto widen = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], r[i].size());
  };
  widen(header_);
  for (const auto& r : rows_) widen(r);
  std::string out;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < width.size(); ++i) {
      const std::string& cell = i < r.size() ? r[i] : std::string();
      const std::string pad(width[i] - cell.size(), ' ');
      if (i > 0) out += "  ";
      out += i == 0 ? cell + pad : pad + cell;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  };
  emit(header_);
  std::size_t rule = 0;
  for (auto w : width) rule += w;
  out += std::string(rule + 2 * (width.size() - 1), '-') + '\n';
  for (const auto& r : rows_) emit(r);
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4e", v);
  return buf;
}

json to_json(const sched::AccessCounts& c) {
  json j = json::object();
  for (int t = 0; t < sched::kTargetCount; ++t) {
    json tj = json::object();
    for (Access a : {Access::read, Access::write}) {
      const auto& ctr = c.at(Target(t), a);
      tj[std::string(sched::to_string(a))] = {{"events", ctr.events}, {"bytes", ctr.bytes}};
    }
    j[std::string(sched::to_string(Target(t)))] = tj;
  }
  return j;
}

json to_json(const sched::DramTrafficReport& d) {
  json passes = json::array();
  for (const auto& p : d.passes) {
    passes.push_back({{"layer", p.layer}, {"direction", p.direction}, {"weight_bytes", p.weight_bytes}});
  }
  return json{{"passes", passes},
              {"weight_bytes", d.weight_bytes},
              {"softmax_weight_bytes", d.softmax_weight_bytes},
              {"input_bytes", d.input_bytes},
              {"output_bytes", d.output_bytes},
              {"onchip_total_bytes", d.onchip_total_bytes},
              {"spill_intermediate_bytes", d.spill_intermediate_bytes},
              {"spill_total_bytes", d.spill_total_bytes},
              {"avoided_fraction", d.avoided_fraction}};
}

json to_json(const sched::ReuseStats& s) {
  auto summary = [](const sched::ReuseSummary& r) {
    return json{{"access_count", r.access_count},
                {"bytes", r.bytes},
                {"reuse_count", r.reuse_count},
                {"max_reuse_distance", r.max_reuse_distance},
                {"min_buffer_bytes", r.min_buffer_bytes},
                {"footprint_bytes", r.footprint_bytes}};
  };
  auto unit_name = [](std::uint8_t u) {
    return u < 4 ? std::string(to_string(Gate(u))) : std::string("shared");
  };
  json streams = json::array();
  for (const auto& [k, r] : s.streams) {
    json j = summary(r);
    j["unit"] = unit_name(k.unit);
    j["target"] = sched::to_string(k.target);
    streams.push_back(j);
  }
  json classes = json::array();
  for (const auto& [k, r] : s.classes) {
    json j = summary(r);
    j["unit"] = unit_name(k.unit);
    j["target"] = sched::to_string(k.target);
    j["object"] = sched::to_string(k.kind);
    classes.push_back(j);
  }
  json storage = json::object();
  for (std::uint8_t u = 0; u < 4; ++u) storage[unit_name(u)] = s.min_weight_storage(u);
  return json{{"streams", streams}, {"classes", classes}, {"min_weight_storage_bytes", storage}};
}

json to_json(const arch::SimReport& r, bool with_outputs) {
  json passes = json::array();
  for (const auto& p : r.passes) {
    passes.push_back({{"layer", p.layer},
                      {"direction", p.direction},
                      {"fetch_bytes", p.fetch_bytes},
                      {"fetch_start", p.fetch_start},
                      {"fetch_end", p.fetch_end},
                      {"compute_start", p.compute_start},
                      {"compute_end", p.compute_end},
                      {"compute_cycles", p.compute_cycles},
                      {"recurrent_wait_cycles", p.recurrent_wait_cycles},
                      {"row_buffer_fallback", p.row_buffer_fallback}});
  }
  json j{
      {"network", r.network},
      {"hardware", r.hardware},
      {"policy", sched::to_string(r.policy)},
      {"timesteps", r.timesteps},
      {"exact", r.exact},
      {"quantized", r.quantized},
      {"quantization", {{"n_bits", r.quant.n_bits}, {"alpha", r.quant.alpha}, {"beta", r.quant.beta}}},
      {"cycles", r.cycles},
      {"compute_cycles", r.compute_cycles},
      {"stall_cycles", r.stall_cycles},
      {"recurrent_wait_cycles", r.recurrent_wait_cycles},
      {"seconds", r.seconds},
      {"accesses", to_json(r.counts)},
      {"dram", to_json(r.dram)},
      {"avg_dram_bandwidth_bytes_per_s", r.avg_dram_bandwidth},
      {"realtime_seconds", r.realtime_seconds},
      {"realtime_dram_bandwidth_bytes_per_s", r.realtime_dram_bandwidth},
      {"realtime_ok", r.realtime_ok},
      {"bandwidth_warning", r.bandwidth_warning},
      {"dpu_subvector_ops", r.dpu_subvector_ops},
      {"mu_ops", r.mu_ops},
      {"dot_products_per_cu", r.dot_products_per_cu},
      {"mu_latency_cycles", r.mu_latency_cycles},
      {"high_water",
       {{"weight_buffer_per_cu", r.high_water.weight_buffer_per_cu},
        {"row_buffer_per_cu", r.high_water.row_buffer_per_cu},
        {"input_buffer_per_cu", r.high_water.input_buffer_per_cu},
        {"intermediate_memory", r.high_water.intermediate_memory}}},
      {"passes", passes},
      {"warnings", r.warnings},
  };
  if (with_outputs && r.outputs) {
    json frames = json::array();
    for (int t = 0; t < r.outputs->length(); ++t) {
      const auto f = r.outputs->frame(t);
      frames.push_back(std::vector<float>(f.begin(), f.end()));
    }
    j["outputs"] = frames;
  }
  return j;
}

json to_json(const energy::EnergyReport& e) {
  return json{{"network", e.network},
              {"hardware", e.hardware},
              {"policy", sched::to_string(e.policy)},
              {"timesteps", e.timesteps},
              {"seconds", e.seconds},
              {"dynamic_j", e.dynamic_by_component},
              {"leakage_j", e.leakage_by_component},
              {"access_bytes", e.access_bytes},
              {"powered_bytes", e.powered_bytes},
              {"dynamic_total_j", e.dynamic_total},
              {"leakage_total_j", e.leakage_total},
              {"total_j", e.total},
              {"group_fraction", e.group_fraction}};
}

namespace {

json ratio_json(const energy::Ratio& r) {
  json j{{"name", r.name}, {"baseline", r.baseline}, {"other", r.other}, {"other_higher", r.other_higher}};
  if (std::isfinite(r.ratio)) {
    j["ratio"] = r.ratio;
  } else {
    j["ratio"] = nullptr;
  }
  return j;
}

std::string ratio_text(double r) { return std::isfinite(r) ? fixed(r, 4) : std::string("inf"); }

}  // namespace

json to_json(const energy::Comparison& c) {
  json dyn = json::array(), leak = json::array(), acc = json::array();
  for (const auto& r : c.dynamic) dyn.push_back(ratio_json(r));
  for (const auto& r : c.leakage) leak.push_back(ratio_json(r));
  for (const auto& r : c.accesses) acc.push_back(ratio_json(r));
  return json{{"dynamic", dyn},
              {"leakage", leak},
              {"access_bytes", acc},
              {"dynamic_total", ratio_json(c.dynamic_total)},
              {"leakage_total", ratio_json(c.leakage_total)},
              {"total", ratio_json(c.total)},
              {"flagged", c.flagged}};
}

std::string text(const arch::SimReport& r) {
  std::string out = "network " + r.network + ", hardware " + r.hardware + ", policy " +
                    std::string(sched::to_string(r.policy)) + ", T=" + std::to_string(r.timesteps) +
                    (r.quantized ? ", quantized partials (" + std::to_string(r.quant.n_bits) + " bits)" : "") +
                    "\n";
  Table t({"metric", "value"});
  t.row({"cycles", std::to_string(r.cycles)});
  t.row({"compute cycles", std::to_string(r.compute_cycles)});
  t.row({"DRAM stall cycles", std::to_string(r.stall_cycles)});
  t.row({"recurrent wait cycles", std::to_string(r.recurrent_wait_cycles)});
  t.row({"seconds", sci(r.seconds)});
  t.row({"MU latency (cycles)", std::to_string(r.mu_latency_cycles)});
  t.row({"DPU sub-vector ops", std::to_string(r.dpu_subvector_ops)});
  t.row({"MU ops", std::to_string(r.mu_ops)});
  t.row({"DRAM bytes", std::to_string(r.dram.onchip_total_bytes)});
  t.row({"avg DRAM bandwidth (MB/s)", fixed(r.avg_dram_bandwidth / 1e6, 3)});
  t.row({"real-time DRAM bandwidth (MB/s)", fixed(r.realtime_dram_bandwidth / 1e6, 3)});
  t.row({"real time", r.realtime_ok ? "yes" : "no"});
  t.row({"weight buffer high water / CU", std::to_string(r.high_water.weight_buffer_per_cu)});
  t.row({"row buffer high water / CU", std::to_string(r.high_water.row_buffer_per_cu)});
  t.row({"input buffer high water / CU", std::to_string(r.high_water.input_buffer_per_cu)});
  t.row({"intermediate memory high water", std::to_string(r.high_water.intermediate_memory)});
  out += t.render();

  Table a({"target", "read events", "read bytes", "write events", "write bytes"});
  for (int i = 0; i < sched::kTargetCount; ++i) {
    const auto& rd = r.counts.at(Target(i), Access::read);
    const auto& wr = r.counts.at(Target(i), Access::write);
    a.row({std::string(sched::to_string(Target(i))), std::to_string(rd.events), std::to_string(rd.bytes),
           std::to_string(wr.events), std::to_string(wr.bytes)});
  }
  out += "\n" + a.render();
  for (const auto& w : r.warnings) out += "warning: " + w + "\n";
  return out;
}

std::string text(const energy::EnergyReport& e) {
  Table t({"component", "group", "dynamic (J)", "leakage (J)"});
  for (const auto& c : energy::components()) {
    t.row({c, std::string(energy::to_string(energy::group_of(c))), sci(e.dynamic_by_component.at(c)),
           sci(e.leakage_by_component.at(c))});
  }
  t.row({"total", "", sci(e.dynamic_total), sci(e.leakage_total)});
  std::string out = t.render();
  out += "total energy " + sci(e.total) + " J;";
  for (const auto& [g, f] : e.group_fraction) out += " " + g + " " + fixed(100.0 * f, 1) + "%";
  return out + "\n";
}

std::string text(const energy::Comparison& c, const std::string& a, const std::string& b) {
  Table t({"component", "dynamic " + b + "/" + a, "leakage " + b + "/" + a});
  for (std::size_t i = 0; i < c.dynamic.size(); ++i) {
    t.row({c.dynamic[i].name, ratio_text(c.dynamic[i].ratio), ratio_text(c.leakage[i].ratio)});
  }
  t.row({"total", ratio_text(c.dynamic_total.ratio), ratio_text(c.leakage_total.ratio)});
  std::string out = t.render();
  Table acc({"access bytes", b + "/" + a});
  for (const auto& r : c.accesses) acc.row({r.name, ratio_text(r.ratio)});
  out += "\n" + acc.render();
  out += "total energy ratio " + ratio_text(c.total.ratio) + "\n";
  if (!c.flagged.empty()) {
    out += b + " is higher for:";
    for (const auto& f : c.flagged) out += " " + f;
    out += "\n";
  }
  return out;
}

std::string text(const sched::ReuseStats& s) {
  Table t({"unit", "target", "accesses", "reuses", "max distance (B)", "footprint (B)"});
  for (const auto& [k, r] : s.streams) {
    t.row({k.unit < 4 ? std::string(to_string(Gate(k.unit))) : std::string("shared"),
           std::string(sched::to_string(k.target)), std::to_string(r.access_count),
           std::to_string(r.reuse_count), std::to_string(r.max_reuse_distance),
           std::to_string(r.footprint_bytes)});
  }
  return t.render();
}

}  // namespace epur::report
