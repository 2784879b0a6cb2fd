// SPDX-License-Identifier: Apache-2.0
#include "epur/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "epur/arch.hpp"
#include "epur/energy.hpp"
#include "epur/io.hpp"
#include "epur/presets.hpp"
#include "epur/quant.hpp"
#include "epur/report.hpp"

namespace epur::cli {

using io::json;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return kIo;
    case ErrorKind::parse: return kParse;
    case ErrorKind::capacity: return kCapacity;
    case ErrorKind::numeric: return kNumeric;
    case ErrorKind::shape: return kShape;
    case ErrorKind::config: return kConfig;
    case ErrorKind::range: return kRange;
    case ErrorKind::invariant: return kInvariant;
  }
  return kInvariant;
}

namespace {

struct Source {
  std::string network;
  std::string preset;
  std::string weights;
  std::string input;
  int length = 0;
  std::uint64_t seed = 1;

  void add(CLI::App* cmd, bool needs_input) {
    cmd->add_option("--network", network, "network descriptor JSON");
    cmd->add_option("--preset", preset,
                    "network preset, or a hardware preset (epur, epur-mwl) next to --network");
    cmd->add_option("--weights", weights, "weight blob (synthetic weights from --seed if absent)");
    if (needs_input) {
      auto* i = cmd->add_option("--input", input, "input sequence (.csv or binary)");
      auto* l = cmd->add_option("--length", length, "synthetic input length T")
                    ->check(CLI::PositiveNumber);
      i->excludes(l);
    }
    cmd->add_option("--seed", seed, "seed for synthetic weights and input");
  }

  bool names_hardware() const {
    const auto names = arch::HardwareConfig::preset_names();
    return std::find(names.begin(), names.end(), preset) != names.end();
  }
};

struct Workload {
  NetworkDescriptor net;
  NetworkWeights weights;
  Sequence input;
  json provenance;
};

NetworkDescriptor load_descriptor(const Source& s) {
  require(s.network.empty() || s.preset.empty() || s.names_hardware(), ErrorKind::config,
          "--network and a network --preset are mutually exclusive");
  if (!s.network.empty()) return io::load_network(s.network);
  if (!s.preset.empty() && !s.names_hardware()) return presets::network(s.preset);
  fail(ErrorKind::config, "give --network or --preset");
}

Workload load_workload(const Source& s, bool needs_input) {
  Workload w;
  w.net = load_descriptor(s);
  w.weights = s.weights.empty() ? presets::synthetic_weights(w.net, s.seed)
                                : io::load_weights(w.net, s.weights);
  w.provenance = {{"network_file", s.network}, {"preset", s.preset},
                  {"weights_file", s.weights}, {"seed", s.seed}};
  if (needs_input) {
    if (!s.input.empty()) {
      w.input = io::load_sequence(s.input);
      w.provenance["input_file"] = s.input;
    } else {
      require(s.length >= 1, ErrorKind::config, "give --input or --length");
      w.input = presets::synthetic_input(s.length, w.net.input_dim, s.seed + 1, w.net.precision);
      w.provenance["synthetic_length"] = s.length;
    }
  }
  return w;
}

void emit(const std::string& path, const json& j) {
  if (!path.empty()) io::write_atomic(path, j.dump(2) + "\n");
}

void setup_logging(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("epur", sink);
  logger->set_pattern("[%l] %v");
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("EPUR_LOG")) level = spdlog::level::from_str(env);
  logger->set_level(level);
  spdlog::set_default_logger(logger);
}

// ---------------------------------------------------------------------------

struct GenOptions {
  std::string preset;
  std::string name = "custom";
  int layers = 0, hidden = 0, input_dim = 0;
  bool bidirectional = false, peephole = false;
  std::string precision = "fp32";
  std::uint64_t seed = 1;
  std::string out_network, out_weights, out_input, report;
  int input_length = 0;
};

int cmd_gen(const GenOptions& o, std::ostream& out) {
  NetworkDescriptor net;
  json j;
  if (!o.preset.empty()) {
    const auto& p = presets::info(o.preset);
    net = presets::network(p);
    j["published_mb"] = p.published_mb;
    j["assumption"] = p.assumption;
  } else {
    require(o.layers > 0 && o.hidden > 0 && o.input_dim > 0, ErrorKind::config,
            "give --preset or --layers, --hidden and --input-dim");
    net = presets::stacked(o.name, o.input_dim, o.layers, o.hidden,
                           o.bidirectional ? Direction::bidirectional : Direction::forward_only,
                           o.peephole, parse_precision(o.precision));
  }
  const auto weights = presets::synthetic_weights(net, o.seed);
  const double mib = presets::footprint_mib(net);
  j["network"] = io::to_json(net);
  j["seed"] = o.seed;
  j["total_weight_bytes"] = net.total_weight_bytes();
  j["footprint_mib"] = mib;
  j["max_pass_weight_bytes"] = net.max_pass_weight_bytes();
  j["single_layer_ratio"] = double(net.total_weight_bytes()) / double(net.max_pass_weight_bytes());

  out << net.name << ": " << net.layers.size() << " layers x " << net.layers.front().hidden_size
      << " neurons, " << to_string(net.layers.front().direction)
      << (net.layers.front().peephole ? ", peephole" : "") << ", " << to_string(net.precision)
      << ", input_dim " << net.input_dim << "\n";
  out << "weight footprint " << net.total_weight_bytes() << " bytes (" << report::fixed(mib, 2)
      << " MiB)";
  if (j.contains("published_mb")) {
    const double pub = j["published_mb"].get<double>();
    const double dev = (mib - pub) / pub;
    j["deviation_from_published"] = dev;
    out << ", published " << report::fixed(pub, 0) << " MB, deviation "
        << report::fixed(100.0 * dev, 1) << "% (assumed: " << j["assumption"].get<std::string>() << ")";
  }
  out << "\n";

  if (!o.out_network.empty()) io::write_atomic(o.out_network, io::to_json(net).dump(2) + "\n");
  if (!o.out_weights.empty()) io::write_atomic(o.out_weights, io::encode_weights(net, weights));
  if (!o.out_input.empty()) {
    require(o.input_length >= 1, ErrorKind::config, "--out-input needs --input-length");
    const auto seq = presets::synthetic_input(o.input_length, net.input_dim, o.seed + 1, net.precision);
    io::write_atomic(o.out_input, io::encode_sequence(seq));
  }
  emit(o.report, j);
  return kOk;
}

struct InferOptions {
  Source src;
  std::string report;
};

int cmd_infer(const InferOptions& o, std::ostream& out) {
  const auto w = load_workload(o.src, true);
  const auto y = network_infer(w.net, w.weights, w.input);
  out << "inferred " << y.length() << " frames of " << y.dim() << " values\n";
  json frames = json::array();
  for (int t = 0; t < y.length(); ++t) {
    const auto f = y.frame(t);
    frames.push_back(std::vector<float>(f.begin(), f.end()));
  }
  emit(o.report, json{{"network", io::to_json(w.net)}, {"source", w.provenance}, {"outputs", frames}});
  return kOk;
}

struct SimOptionsCli {
  Source src;
  std::string hw;
  std::string policy;
  bool quantize = false, no_quantize = false, hardware_mode = false, timing_only = false;
  bool calibrate = false, with_outputs = false;
  int n_bits = 0;
  float alpha = 0.0f;
  double fps = 100.0;
  std::string report, trace_csv;
};

struct Prepared {
  io::ResolvedConfig config;
  arch::SimOptions sim;
};

Prepared prepare(const SimOptionsCli& o, const Workload* w, const std::string& hw_default,
                 const std::string& policy_override) {
  Prepared p;
  const std::string policy_name = policy_override.empty() ? o.policy : policy_override;
  std::string hw = o.hw;
  if (hw.empty() && !hw_default.empty()) hw = hw_default;
  if (hw.empty() && o.src.names_hardware()) hw = o.src.preset;
  if (hw.empty()) hw = hw_default.empty() ? (policy_name == "mwl" ? "epur-mwl" : "epur") : hw_default;
  p.config = io::resolve_config(hw);
  auto& cfg = p.config.hardware;
  p.sim.policy = policy_name.empty() ? cfg.default_policy : sched::parse_policy(policy_name);
  p.sim.exact = !o.hardware_mode;
  p.sim.functional = !o.timing_only;
  p.sim.quantize = o.no_quantize ? false : (o.quantize || cfg.quantize_partials);
  p.sim.frames_per_second = o.fps;
  int bits = o.n_bits > 0 ? o.n_bits : cfg.quant.n_bits;
  float alpha = o.alpha > 0.0f ? o.alpha : cfg.quant.alpha;
  if (o.calibrate && w) alpha = calibrate_alpha(w->net, w->weights, w->input);
  p.sim.quant = QuantConfig::make(bits, alpha);
  return p;
}

json resolved(const Workload& w, const Prepared& p) {
  return json{{"network", io::to_json(w.net)},
              {"source", w.provenance},
              {"hardware", io::to_json(p.config.hardware)},
              {"energy_table", io::to_json(p.config.energy)},
              {"options",
               {{"policy", sched::to_string(p.sim.policy)},
                {"exact", p.sim.exact},
                {"functional", p.sim.functional},
                {"quantize", p.sim.quantize},
                {"n_bits", p.sim.quant.n_bits},
                {"alpha", p.sim.quant.alpha},
                {"frames_per_second", p.sim.frames_per_second}}}};
}

/// The built-in oracle check. Exact unquantized runs must match the reference
/// bit for bit; quantized or hardware-order runs report their deviation.
json oracle_check(const Workload& w, const arch::SimReport& r, bool& ok) {
  ok = true;
  if (!r.outputs) return json{{"checked", false}};
  const auto ref = network_infer(w.net, w.weights, w.input);
  const auto d = compare_sequences(ref, *r.outputs);
  const bool must_match = r.exact && !r.quantized;
  ok = !must_match || d.identical;
  for (float v : r.outputs->values()) {
    if (!(std::fabs(v) <= 1.0f)) ok = false;
  }
  return json{{"checked", true},
              {"bit_identical", d.identical},
              {"required_bit_identical", must_match},
              {"max_abs_diff", d.max_abs},
              {"cosine_similarity", d.cosine},
              {"passed", ok}};
}

void export_traces(const std::string& path, const NetworkDescriptor& net, sched::Policy policy,
                   int T, std::uint32_t partial_bytes, const arch::HardwareConfig& cfg) {
  if (path.empty()) return;
  std::ostringstream os;
  bool header = true;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto traces = policy == sched::Policy::mwl
                      ? sched::trace_mwl(net.layers[l], net.precision, T, partial_bytes,
                                         std::uint32_t(cfg.row_buffer_bytes_per_cu))
                      : sched::trace_conventional(net.layers[l], net.precision, T,
                                                  std::uint32_t(cfg.row_buffer_bytes_per_cu));
    for (auto& t : traces) {
      t.layer = int(l);
      io::write_trace_csv(os, t, header);
      header = false;
    }
  }
  io::write_atomic(path, os.str());
}

int cmd_simulate(const SimOptionsCli& o, std::ostream& out) {
  const auto w = load_workload(o.src, true);
  const auto p = prepare(o, &w, "", "");
  const auto r = arch::simulate(w.net, w.weights, w.input, p.config.hardware, p.sim);
  const auto e = energy::account(r, p.config.energy, p.config.hardware);
  bool ok = true;
  const json check = oracle_check(w, r, ok);

  out << report::text(r) << "\n" << report::text(e);
  if (check.value("checked", false)) {
    out << "oracle check: " << (ok ? "passed" : "FAILED") << " (bit identical "
        << (check["bit_identical"].get<bool>() ? "yes" : "no") << ", max |dh| "
        << report::sci(check["max_abs_diff"].get<double>()) << ", cosine "
        << report::fixed(check["cosine_similarity"].get<double>(), 6) << ")\n";
  }
  json j = resolved(w, p);
  j["report"] = report::to_json(r, o.with_outputs);
  j["energy"] = report::to_json(e);
  j["oracle_check"] = check;
  emit(o.report, j);
  export_traces(o.trace_csv, w.net, p.sim.policy, r.timesteps,
                r.quantized ? std::uint32_t(r.quant.code_bytes()) : 4u, p.config.hardware);
  if (!ok) {
    spdlog::error("simulated outputs do not match the reference model");
    return kInvariant;
  }
  return kOk;
}

struct ReuseOptions {
  Source src;
  int length = 16;
  int layer = -1;
  std::string policy;
  int partial_bytes = 1;
  std::string hw = "epur";
  std::string report, trace_csv;
};

int cmd_reuse(const ReuseOptions& o, std::ostream& out) {
  const auto net = load_descriptor(o.src);
  const auto cfg = io::resolve_config(o.hw).hardware;
  require(o.length >= 1, ErrorKind::config, "--length must be at least 1");
  require(o.layer < int(net.layers.size()), ErrorKind::config, "--layer out of range");
  std::vector<sched::Policy> policies;
  if (o.policy.empty()) {
    policies = {sched::Policy::conventional, sched::Policy::mwl};
  } else {
    policies = {sched::parse_policy(o.policy)};
  }
  json layers = json::array();
  std::ostringstream csv;
  bool header = true;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (o.layer >= 0 && std::size_t(o.layer) != l) continue;
    const auto& layer = net.layers[l];
    json lj{{"layer", l}};
    for (auto policy : policies) {
      const auto traces =
          policy == sched::Policy::mwl
              ? sched::trace_mwl(layer, net.precision, o.length, std::uint32_t(o.partial_bytes),
                                 std::uint32_t(cfg.row_buffer_bytes_per_cu))
              : sched::trace_conventional(layer, net.precision, o.length,
                                          std::uint32_t(cfg.row_buffer_bytes_per_cu));
      json dirs = json::array();
      for (auto t : traces) {
        t.layer = int(l);
        const auto stats = sched::reuse_analysis(t.events);
        const auto counts = sched::count_accesses(t.events);
        out << "layer " << l << " direction " << t.direction << " policy "
            << sched::to_string(policy) << "\n"
            << report::text(stats);
        out << "min weight storage per gate: " << stats.min_weight_storage(0) << " bytes\n\n";
        json dj = report::to_json(stats);
        dj["direction"] = t.direction;
        dj["accesses"] = report::to_json(counts);
        dirs.push_back(dj);
        if (!o.trace_csv.empty()) {
          io::write_trace_csv(csv, t, header);
          header = false;
        }
      }
      lj[std::string(sched::to_string(policy))] = dirs;
    }
    layers.push_back(lj);
  }
  emit(o.report, json{{"network", io::to_json(net)},
                      {"timesteps", o.length},
                      {"partial_bytes", o.partial_bytes},
                      {"row_buffer_bytes", cfg.row_buffer_bytes_per_cu},
                      {"layers", layers}});
  if (!o.trace_csv.empty()) io::write_atomic(o.trace_csv, csv.str());
  return kOk;
}

struct CompareOptions {
  SimOptionsCli sim;
  std::string policy_a = "conventional", policy_b = "mwl";
  std::string hw_a, hw_b;
};

int cmd_compare(const CompareOptions& o, std::ostream& out) {
  const auto w = load_workload(o.sim.src, true);
  auto hw_for = [](const std::string& given, const std::string& policy) {
    return given.empty() ? (policy == "mwl" ? std::string("epur-mwl") : std::string("epur")) : given;
  };
  SimOptionsCli base = o.sim;
  base.hw.clear();
  const auto pa = prepare(base, &w, hw_for(o.hw_a, o.policy_a), o.policy_a);
  const auto pb = prepare(base, &w, hw_for(o.hw_b, o.policy_b), o.policy_b);

  auto job = [&w](const Prepared& p) {
    return arch::simulate(w.net, w.weights, w.input, p.config.hardware, p.sim);
  };
  auto fa = std::async(std::launch::async, job, std::cref(pa));
  auto fb = std::async(std::launch::async, job, std::cref(pb));
  const auto ra = fa.get();
  const auto rb = fb.get();

  bool ok_a = true, ok_b = true;
  const json ca = oracle_check(w, ra, ok_a);
  const json cb = oracle_check(w, rb, ok_b);
  const auto ea = energy::account(ra, pa.config.energy, pa.config.hardware);
  const auto eb = energy::account(rb, pb.config.energy, pb.config.hardware);
  const auto cmp = energy::compare(ea, eb);

  const std::string a = std::string(sched::to_string(ra.policy));
  const std::string b = std::string(sched::to_string(rb.policy));
  const auto wb_a = ra.counts.at(sched::Target::weight_buffer, sched::Access::read).bytes;
  const auto wb_b = rb.counts.at(sched::Target::weight_buffer, sched::Access::read).bytes;
  const double wb_ratio = wb_a ? double(wb_b) / double(wb_a) : 1.0;
  out << "weight-buffer read bytes: " << a << " " << wb_a << ", " << b << " " << wb_b
      << ", ratio " << report::fixed(wb_ratio, 4) << "\n";
  out << "cycles: " << a << " " << ra.cycles << ", " << b << " " << rb.cycles << "\n\n";
  out << report::text(cmp, a, b);

  json j{{"a", resolved(w, pa)}, {"b", resolved(w, pb)}};
  j["a"]["report"] = report::to_json(ra, false);
  j["b"]["report"] = report::to_json(rb, false);
  j["a"]["energy"] = report::to_json(ea);
  j["b"]["energy"] = report::to_json(eb);
  j["a"]["oracle_check"] = ca;
  j["b"]["oracle_check"] = cb;
  j["weight_buffer_read_ratio"] = wb_ratio;
  j["comparison"] = report::to_json(cmp);
  emit(o.sim.report, j);
  if (!ok_a || !ok_b) {
    spdlog::error("simulated outputs do not match the reference model");
    return kInvariant;
  }
  return kOk;
}

struct SweepOptions {
  SimOptionsCli sim;
  std::vector<int> bits = {4, 6, 8, 10, 12, 16};
};

int cmd_sweep(const SweepOptions& o, std::ostream& out) {
  const auto w = load_workload(o.sim.src, true);
  SimOptionsCli base = o.sim;
  base.quantize = true;
  base.no_quantize = false;
  base.timing_only = false;
  auto p = prepare(base, &w, "epur-mwl", "mwl");
  const auto ref = network_infer(w.net, w.weights, w.input);
  report::Table t({"n_bits", "alpha", "step", "partial bytes", "max |dh|", "cosine"});
  json rows = json::array();
  for (int bits : o.bits) {
    p.sim.quant = QuantConfig::make(bits, p.sim.quant.alpha);
    const auto r = arch::simulate(w.net, w.weights, w.input, p.config.hardware, p.sim);
    const auto d = compare_sequences(ref, *r.outputs);
    t.row({std::to_string(bits), report::fixed(p.sim.quant.alpha, 2), report::sci(p.sim.quant.step()),
           std::to_string(p.sim.quant.code_bytes()), report::sci(d.max_abs), report::fixed(d.cosine, 6)});
    rows.push_back({{"n_bits", bits},
                    {"alpha", p.sim.quant.alpha},
                    {"beta", p.sim.quant.beta},
                    {"max_abs_diff", d.max_abs},
                    {"cosine_similarity", d.cosine},
                    {"intermediate_write_bytes",
                     r.counts.at(sched::Target::intermediate_memory, sched::Access::write).bytes}});
  }
  out << t.render();
  json j = resolved(w, p);
  j["sweep"] = rows;
  emit(o.sim.report, j);
  return kOk;
}

void add_sim_flags(CLI::App* cmd, SimOptionsCli& o, bool with_policy) {
  o.src.add(cmd, true);
  cmd->add_option("--hw", o.hw, "hardware preset (epur, epur-mwl) or config JSON");
  if (with_policy) {
    cmd->add_option("--policy", o.policy, "conventional or mwl (default: the hardware's)")
        ->check(CLI::IsMember({"conventional", "mwl"}));
  }
  auto* q = cmd->add_flag("--quantize", o.quantize, "quantize MWL partials");
  auto* nq = cmd->add_flag("--no-quantize", o.no_quantize, "keep MWL partials in full precision");
  q->excludes(nq);
  cmd->add_option("--n-bits", o.n_bits, "quantization width")->check(CLI::Range(2, 16));
  cmd->add_option("--alpha", o.alpha, "quantization clamp magnitude");
  cmd->add_flag("--calibrate", o.calibrate, "calibrate alpha on the input sequence");
  cmd->add_flag("--hardware-mode", o.hardware_mode, "tree-reduce each DPU sub-vector");
  cmd->add_option("--fps", o.fps, "input frames per second for the real-time check");
  cmd->add_option("--report", o.report, "JSON report path");
}

}  // namespace

namespace {

int run_impl(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cycle-level simulator of an LSTM inference accelerator"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen-network", "emit a network descriptor and synthetic weights");
  g->add_option("--preset", gen.preset, "BYSDNE, RLDRADSPR, EESEN, LDLRNN or GMAT");
  g->add_option("--name", gen.name);
  g->add_option("--layers", gen.layers);
  g->add_option("--hidden", gen.hidden);
  g->add_option("--input-dim", gen.input_dim);
  g->add_flag("--bidirectional", gen.bidirectional);
  g->add_flag("--peephole", gen.peephole);
  g->add_option("--precision", gen.precision)->check(CLI::IsMember({"fp32", "fp16"}));
  g->add_option("--seed", gen.seed);
  g->add_option("--out-network", gen.out_network);
  g->add_option("--out-weights", gen.out_weights);
  g->add_option("--out-input", gen.out_input, "also write a synthetic input sequence");
  g->add_option("--input-length", gen.input_length);
  g->add_option("--report", gen.report);

  InferOptions inf;
  auto* i = app.add_subcommand("infer", "run the reference model only");
  inf.src.add(i, true);
  i->add_option("--report", inf.report);

  SimOptionsCli sim;
  auto* s = app.add_subcommand("simulate", "simulate one schedule and check it against the reference");
  add_sim_flags(s, sim, true);
  s->add_flag("--timing-only", sim.timing_only, "skip the functional datapath");
  s->add_flag("--with-outputs", sim.with_outputs, "embed output frames in the report");
  s->add_option("--trace-csv", sim.trace_csv, "export the access traces");

  ReuseOptions reuse;
  auto* r = app.add_subcommand("analyze-reuse", "reuse distances of the schedule traces");
  r->add_option("--network", reuse.src.network);
  r->add_option("--preset", reuse.src.preset);
  r->add_option("--length", reuse.length, "sequence length T");
  r->add_option("--layer", reuse.layer, "only this layer");
  r->add_option("--policy", reuse.policy)->check(CLI::IsMember({"conventional", "mwl"}));
  r->add_option("--partial-bytes", reuse.partial_bytes, "bytes per stored MWL partial");
  r->add_option("--hw", reuse.hw);
  r->add_option("--report", reuse.report);
  r->add_option("--trace-csv", reuse.trace_csv);

  CompareOptions cmp;
  auto* c = app.add_subcommand("compare", "simulate two schedules and compare energy");
  add_sim_flags(c, cmp.sim, false);
  c->add_option("--policy-a", cmp.policy_a)->check(CLI::IsMember({"conventional", "mwl"}));
  c->add_option("--policy-b", cmp.policy_b)->check(CLI::IsMember({"conventional", "mwl"}));
  c->add_option("--hw-a", cmp.hw_a);
  c->add_option("--hw-b", cmp.hw_b);

  SweepOptions sweep;
  auto* q = app.add_subcommand("quantize-sweep", "output error of quantized MWL across widths");
  add_sim_flags(q, sweep.sim, false);
  q->add_option("--bits", sweep.bits, "widths to try")->check(CLI::Range(2, 16));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return cmd_gen(gen, out);
    if (*i) return cmd_infer(inf, out);
    if (*s) return cmd_simulate(sim, out);
    if (*r) return cmd_reuse(reuse, out);
    if (*c) return cmd_compare(cmp, out);
    if (*q) return cmd_sweep(sweep, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kCapacity;
  }
  return kUsage;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  setup_logging(err);
  const int code = run_impl(argc, argv, out, err);
  // `err` may not outlive this call.
  spdlog::set_default_logger(
      std::make_shared<spdlog::logger>("epur", std::make_shared<spdlog::sinks::stderr_sink_mt>()));
  return code;
}

}  // namespace epur::cli
