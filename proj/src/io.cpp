// SPDX-License-Identifier: Apache-2.0
#include "epur/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "epur/half.hpp"

namespace epur::io {

namespace {

template <class T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(char((std::uint64_t(v) >> (8 * i)) & 0xff));
}

template <class T>
T get_le(std::string_view in, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= std::uint64_t(std::uint8_t(in[offset + i])) << (8 * i);
  }
  return T(v);
}

void put_f32(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_le(out, bits);
}

float get_f32(std::string_view in, std::size_t offset) {
  const auto bits = get_le<std::uint32_t>(in, offset);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

/// Rejects keys a reader does not know, so typos do not silently fall back to defaults.
void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require(j.is_object(), ErrorKind::parse, where + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    require(ok.contains(k), ErrorKind::parse, where + ": unknown key '" + k + "'");
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  require(j.contains(key), ErrorKind::parse, where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, where + ": bad value for '" + key + "': " + e.what());
  }
}

template <class T>
void maybe(const json& j, const char* key, T& dst, const std::string& where) {
  if (j.contains(key)) dst = get<T>(j, key, where);
}

json parse_json(std::string_view text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::parse, where + ": " + e.what());
  }
}

template <class F>
void for_each_value(const NetworkDescriptor& net, NetworkWeights& w, F&& f) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    for (auto& ws : w.layers[l].directions) {
      for (Gate g : kGates) {
        auto& gw = ws[g];
        for (float& v : gw.forward.values()) f(v);
        for (float& v : gw.recurrent.values()) f(v);
        for (float& v : gw.bias) f(v);
        if (layer.peephole && has_peephole_term(g)) {
          for (float& v : gw.peephole) f(v);
        }
      }
    }
  }
}

std::uint64_t expected_values(const NetworkDescriptor& net) {
  std::uint64_t n = 0;
  for (const auto& l : net.layers) n += l.pass_values() * std::uint64_t(l.directions());
  return n;
}

NetworkWeights empty_weights(const NetworkDescriptor& net) {
  NetworkWeights w;
  for (const auto& l : net.layers) {
    LayerWeights lw;
    for (int d = 0; d < l.directions(); ++d) {
      lw.directions.push_back(WeightSet::zeros(l.input_size, l.hidden_size, l.peephole));
    }
    w.layers.push_back(std::move(lw));
  }
  return w;
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::io, "failed reading '" + path.string() + "'");
  return std::move(ss).str();
}

void write_atomic(const fs::path& path, std::string_view content) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  static thread_local std::mt19937_64 salt{std::random_device{}()};
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(salt() % 1000000));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot create '" + tmp.string() + "'");
    out.write(content.data(), std::streamsize(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      fail(ErrorKind::io, "failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorKind::io, "cannot move report into place at '" + path.string() + "'");
  }
}

// ---------------------------------------------------------------------------
// Network descriptor

json to_json(const NetworkDescriptor& net) {
  json j;
  j["name"] = net.name;
  j["input_dim"] = net.input_dim;
  j["precision"] = to_string(net.precision);
  j["output_classes"] = net.output_classes;
  j["layers"] = json::array();
  for (const auto& l : net.layers) {
    j["layers"].push_back({{"input_size", l.input_size},
                           {"hidden_size", l.hidden_size},
                           {"direction", to_string(l.direction)},
                           {"peephole", l.peephole}});
  }
  return j;
}

NetworkDescriptor network_from_json(const json& j) {
  const std::string where = "network";
  only_keys(j, {"name", "input_dim", "precision", "output_classes", "layers"}, where);
  NetworkDescriptor net;
  maybe(j, "name", net.name, where);
  net.input_dim = get<int>(j, "input_dim", where);
  if (j.contains("precision")) net.precision = parse_precision(get<std::string>(j, "precision", where));
  maybe(j, "output_classes", net.output_classes, where);
  require(j.contains("layers") && j["layers"].is_array(), ErrorKind::parse,
          where + ": 'layers' must be an array");
  int i = 0;
  for (const auto& lj : j["layers"]) {
    const std::string lw = where + ".layers[" + std::to_string(i++) + "]";
    only_keys(lj, {"input_size", "hidden_size", "direction", "peephole"}, lw);
    LayerDescriptor l;
    l.hidden_size = get<int>(lj, "hidden_size", lw);
    l.input_size = get<int>(lj, "input_size", lw);
    if (lj.contains("direction")) l.direction = parse_direction(get<std::string>(lj, "direction", lw));
    maybe(lj, "peephole", l.peephole, lw);
    net.layers.push_back(l);
  }
  net.validate();
  return net;
}

NetworkDescriptor load_network(const fs::path& path) {
  try {
    return network_from_json(parse_json(read_file(path), path.string()));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    throw e.with_context(path.string());
  }
}

// ---------------------------------------------------------------------------
// Hardware config and energy table

json to_json(const arch::HardwareConfig& c) {
  return json{
      {"name", c.name},
      {"frequency_hz", c.frequency_hz},
      {"dpu_width", c.dpu_width},
      {"weight_mem_bytes_per_cu", c.weight_mem_bytes_per_cu},
      {"input_mem_bytes_per_cu", c.input_mem_bytes_per_cu},
      {"row_buffer_bytes_per_cu", c.row_buffer_bytes_per_cu},
      {"intermediate_mem_bytes", c.intermediate_mem_bytes},
      {"op_latency",
       {{"add", c.latency.add},
        {"mul", c.latency.mul},
        {"exp", c.latency.exp},
        {"div", c.latency.div},
        {"cmp", c.latency.cmp},
        {"move", c.latency.move}}},
      {"mu_comm_cycles", c.mu_comm_cycles},
      {"mu_initiation_interval", c.mu_initiation_interval},
      {"dram_bandwidth_bytes_per_s", c.dram_bandwidth_bytes_per_s},
      {"dram_latency_s", c.dram_latency_s},
      {"bank_bytes", c.bank_bytes},
      {"power_gating", c.power_gating},
      {"default_policy", sched::to_string(c.default_policy)},
      {"quantization",
       {{"enabled", c.quantize_partials}, {"n_bits", c.quant.n_bits}, {"alpha", c.quant.alpha}}},
  };
}

arch::HardwareConfig config_from_json(const json& j) {
  const std::string where = "hardware config";
  only_keys(j,
            {"preset", "name", "frequency_hz", "dpu_width", "weight_mem_bytes_per_cu",
             "input_mem_bytes_per_cu", "row_buffer_bytes_per_cu", "intermediate_mem_bytes",
             "op_latency", "mu_comm_cycles", "mu_initiation_interval",
             "dram_bandwidth_bytes_per_s", "dram_latency_s", "bank_bytes", "power_gating",
             "default_policy", "quantization", "energy"},
            where);
  auto c = arch::HardwareConfig::preset(j.contains("preset") ? get<std::string>(j, "preset", where)
                                                             : std::string("epur"));
  maybe(j, "name", c.name, where);
  maybe(j, "frequency_hz", c.frequency_hz, where);
  maybe(j, "dpu_width", c.dpu_width, where);
  maybe(j, "weight_mem_bytes_per_cu", c.weight_mem_bytes_per_cu, where);
  maybe(j, "input_mem_bytes_per_cu", c.input_mem_bytes_per_cu, where);
  maybe(j, "row_buffer_bytes_per_cu", c.row_buffer_bytes_per_cu, where);
  maybe(j, "intermediate_mem_bytes", c.intermediate_mem_bytes, where);
  if (j.contains("op_latency")) {
    const auto& l = j["op_latency"];
    const std::string lw = where + ".op_latency";
    only_keys(l, {"add", "mul", "exp", "div", "cmp", "move"}, lw);
    maybe(l, "add", c.latency.add, lw);
    maybe(l, "mul", c.latency.mul, lw);
    maybe(l, "exp", c.latency.exp, lw);
    maybe(l, "div", c.latency.div, lw);
    maybe(l, "cmp", c.latency.cmp, lw);
    maybe(l, "move", c.latency.move, lw);
  }
  maybe(j, "mu_comm_cycles", c.mu_comm_cycles, where);
  maybe(j, "mu_initiation_interval", c.mu_initiation_interval, where);
  maybe(j, "dram_bandwidth_bytes_per_s", c.dram_bandwidth_bytes_per_s, where);
  maybe(j, "dram_latency_s", c.dram_latency_s, where);
  maybe(j, "bank_bytes", c.bank_bytes, where);
  maybe(j, "power_gating", c.power_gating, where);
  if (j.contains("default_policy")) {
    c.default_policy = sched::parse_policy(get<std::string>(j, "default_policy", where));
  }
  if (j.contains("quantization")) {
    const auto& q = j["quantization"];
    const std::string qw = where + ".quantization";
    only_keys(q, {"enabled", "n_bits", "alpha"}, qw);
    maybe(q, "enabled", c.quantize_partials, qw);
    int bits = c.quant.n_bits;
    float alpha = c.quant.alpha;
    maybe(q, "n_bits", bits, qw);
    maybe(q, "alpha", alpha, qw);
    c.quant = QuantConfig::make(bits, alpha);
  }
  c.validate();
  return c;
}

json to_json(const energy::EnergyTable& t) {
  return json{{"dynamic_j", t.dynamic},
              {"leakage_w_per_byte", t.leakage_per_byte},
              {"leakage_w", t.leakage}};
}

energy::EnergyTable energy_table_from_json(const json& j) {
  const std::string where = "energy table";
  only_keys(j, {"dynamic_j", "leakage_w_per_byte", "leakage_w"}, where);
  auto t = energy::EnergyTable::defaults();
  auto merge = [&](const char* key, std::map<std::string, double>& dst) {
    if (!j.contains(key)) return;
    require(j[key].is_object(), ErrorKind::parse, where + ": '" + key + "' must be an object");
    for (const auto& [k, v] : j[key].items()) {
      require(v.is_number(), ErrorKind::parse, where + ": '" + k + "' must be a number");
      dst[k] = v.get<double>();
    }
  };
  merge("dynamic_j", t.dynamic);
  merge("leakage_w_per_byte", t.leakage_per_byte);
  merge("leakage_w", t.leakage);
  t.validate();
  return t;
}

ResolvedConfig load_config(const fs::path& path) {
  try {
    const json j = parse_json(read_file(path), path.string());
    ResolvedConfig rc;
    rc.hardware = config_from_json(j);
    if (j.contains("energy")) rc.energy = energy_table_from_json(j["energy"]);
    return rc;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    throw e.with_context(path.string());
  }
}

ResolvedConfig resolve_config(const std::string& preset_or_path) {
  for (const auto& name : arch::HardwareConfig::preset_names()) {
    if (name == preset_or_path) return ResolvedConfig{arch::HardwareConfig::preset(name)};
  }
  // A bare word that is neither a preset nor an existing file is a typo'd preset.
  if (fs::path(preset_or_path).extension().empty() && !fs::exists(preset_or_path)) {
    fail(ErrorKind::config, "unknown hardware preset '" + preset_or_path + "'");
  }
  return load_config(preset_or_path);
}

// ---------------------------------------------------------------------------
// Weights

std::string encode_weights(const NetworkDescriptor& net, const NetworkWeights& weights) {
  validate_weights(net, weights);
  const std::uint64_t count = expected_values(net);
  const bool half = net.precision == Precision::fp16;
  std::string out;
  out.reserve(16 + count * (half ? 2 : 4));
  out.append(kWeightMagic, 4);
  put_le(out, kWeightVersion);
  put_le(out, std::uint16_t(half ? 1 : 0));
  put_le(out, count);
  auto copy = weights;
  for_each_value(net, copy, [&](float& v) {
    if (half) {
      put_le(out, float_to_half_bits(v));
    } else {
      put_f32(out, v);
    }
  });
  return out;
}

NetworkWeights decode_weights(const NetworkDescriptor& net, std::string_view blob) {
  net.validate();
  require(blob.size() >= 16, ErrorKind::parse, "weight blob shorter than its header");
  require(std::memcmp(blob.data(), kWeightMagic, 4) == 0, ErrorKind::parse, "bad weight blob magic");
  const auto version = get_le<std::uint16_t>(blob, 4);
  require(version == kWeightVersion, ErrorKind::parse,
          "unsupported weight blob version " + std::to_string(version));
  const auto tag = get_le<std::uint16_t>(blob, 6);
  require(tag <= 1, ErrorKind::parse, "unknown precision tag " + std::to_string(tag));
  const Precision p = tag == 1 ? Precision::fp16 : Precision::fp32;
  require(p == net.precision, ErrorKind::shape,
          "weight blob is " + std::string(to_string(p)) + " but the network is " +
              std::string(to_string(net.precision)));
  const auto count = get_le<std::uint64_t>(blob, 8);
  const std::uint64_t expected = expected_values(net);
  require(count == expected, ErrorKind::shape,
          "weight blob holds " + std::to_string(count) + " values, network needs " +
              std::to_string(expected));
  const std::size_t width = p == Precision::fp16 ? 2 : 4;
  require(blob.size() == 16 + count * width, ErrorKind::parse,
          "weight blob size " + std::to_string(blob.size()) + " does not match its header");

  NetworkWeights w = empty_weights(net);
  std::size_t offset = 16;
  for_each_value(net, w, [&](float& v) {
    v = width == 2 ? half_bits_to_float(get_le<std::uint16_t>(blob, offset)) : get_f32(blob, offset);
    offset += width;
  });
  validate_weights(net, w);
  return w;
}

NetworkWeights load_weights(const NetworkDescriptor& net, const fs::path& path) {
  try {
    return decode_weights(net, read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    throw e.with_context(path.string());
  }
}

// ---------------------------------------------------------------------------
// Sequences

std::string encode_sequence(const Sequence& s) {
  std::string out;
  out.reserve(8 + s.values().size() * 4);
  put_le(out, std::uint32_t(s.length()));
  put_le(out, std::uint32_t(s.dim()));
  for (float v : s.values()) put_f32(out, v);
  return out;
}

Sequence decode_sequence(std::string_view bytes) {
  require(bytes.size() >= 8, ErrorKind::parse, "input sequence shorter than its header");
  const auto T = get_le<std::uint32_t>(bytes, 0);
  const auto dim = get_le<std::uint32_t>(bytes, 4);
  require(T >= 1 && dim >= 1, ErrorKind::shape, "input sequence must have T >= 1 and dim >= 1");
  require(std::uint64_t(bytes.size()) == 8 + std::uint64_t(T) * dim * 4, ErrorKind::parse,
          "input sequence size does not match its (T, dim) header");
  Sequence s{int(T), int(dim)};
  auto v = s.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = get_f32(bytes, 8 + 4 * i);
  require_finite(s.values(), "input sequence");
  return s;
}

Sequence parse_csv_sequence(std::string_view text) {
  Sequence s;
  std::vector<float> row;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.remove_suffix(1);
    }
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    row.clear();
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t comma = std::min(line.find(',', start), line.size());
      std::string_view cell = line.substr(start, comma - start);
      while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
      while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
      float v = 0.0f;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      require(ec == std::errc() && ptr == cell.data() + cell.size() && !cell.empty(),
              ErrorKind::parse,
              "CSV line " + std::to_string(line_no) + ": bad number '" + std::string(cell) + "'");
      row.push_back(v);
      start = comma + 1;
    }
    if (s.dim() == 0) s = Sequence(int(row.size()));
    require(int(row.size()) == s.dim(), ErrorKind::shape,
            "CSV line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                " values, expected " + std::to_string(s.dim()));
    s.append(row);
  }
  require(s.length() >= 1, ErrorKind::shape, "CSV input has no frames");
  require_finite(s.values(), "input sequence");
  return s;
}

Sequence load_sequence(const fs::path& path) {
  const std::string bytes = read_file(path);
  try {
    if (path.extension() == ".csv") return parse_csv_sequence(bytes);
    return decode_sequence(bytes);
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

void write_trace_csv(std::ostream& os, const sched::AccessTrace& trace, bool header) {
  if (header) os << "layer,direction,target,object_id,rw,bytes,t,neuron\n";
  for (const auto& e : trace.events) {
    os << trace.layer << ',' << trace.direction << ',' << sched::to_string(e.target) << ','
       << e.object_id() << ',' << sched::to_string(e.rw) << ',' << e.bytes << ',' << e.timestep
       << ',' << e.neuron << '\n';
  }
}

}  // namespace epur::io
