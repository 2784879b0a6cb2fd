// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "epur/io.hpp"
#include "epur/presets.hpp"
#include "support.hpp"

using namespace epur;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::invariant;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "epur_test_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("network descriptors round trip through JSON") {
  for (const auto& p : presets::all()) {
    const auto net = presets::network(p);
    const auto back = io::network_from_json(io::to_json(net));
    CHECK(io::to_json(back) == io::to_json(net));
    CHECK(back.total_weight_bytes() == net.total_weight_bytes());
  }
}

TEST_CASE("descriptor parsing is strict") {
  auto j = io::to_json(testing::single_layer(4, 4));
  j["colour"] = "blue";
  CHECK(kind_of([&] { io::network_from_json(j); }) == ErrorKind::parse);
  j = io::to_json(testing::single_layer(4, 4));
  j["layers"][0]["hidden_size"] = "four";
  CHECK(kind_of([&] { io::network_from_json(j); }) == ErrorKind::parse);
  j = io::to_json(testing::single_layer(4, 4));
  j.erase("input_dim");
  CHECK(kind_of([&] { io::network_from_json(j); }) == ErrorKind::parse);

  const auto path = scratch("bad.json");
  io::write_atomic(path, "{\"input_dim\": 3, \"layers\": [");
  CHECK(kind_of([&] { io::load_network(path); }) == ErrorKind::parse);
  CHECK(kind_of([&] { io::load_network(scratch("missing.json")); }) == ErrorKind::io);
}

TEST_CASE("weight blobs round trip in both precisions") {
  for (Precision p : {Precision::fp32, Precision::fp16}) {
    const auto net = presets::stacked("w", 5, 2, 6, Direction::bidirectional, true, p);
    const auto w = presets::synthetic_weights(net, 3);
    const auto blob = io::encode_weights(net, w);
    CHECK(blob.size() == 16 + net.total_weight_bytes());
    CHECK(blob.substr(0, 4) == "EPRW");
    CHECK(io::decode_weights(net, blob) == w);

    auto bad = blob;
    bad[0] = 'X';
    CHECK(kind_of([&] { io::decode_weights(net, bad); }) == ErrorKind::parse);
    CHECK(kind_of([&] { io::decode_weights(net, blob.substr(0, blob.size() - 1)); }) == ErrorKind::parse);
    const auto other = presets::stacked("w", 5, 2, 7, Direction::bidirectional, true, p);
    CHECK(kind_of([&] { io::decode_weights(other, blob); }) == ErrorKind::shape);
  }
}

TEST_CASE("sequences round trip in binary") {
  const auto s = presets::synthetic_input(7, 3, 9);
  const auto bytes = io::encode_sequence(s);
  CHECK(bytes.size() == 8 + 7 * 3 * 4);
  CHECK(io::decode_sequence(bytes) == s);
  CHECK(kind_of([&] { io::decode_sequence(bytes.substr(0, 20)); }) == ErrorKind::parse);
  const auto path = scratch("seq.bin");
  io::write_atomic(path, bytes);
  CHECK(io::load_sequence(path) == s);
}

TEST_CASE("CSV sequences") {
  const auto s = io::parse_csv_sequence("# two frames\n1, 2.5,-3\n\n4,5,6e-1  # trailing\n");
  REQUIRE(s.length() == 2);
  REQUIRE(s.dim() == 3);
  CHECK(s.frame(0)[1] == 2.5f);
  CHECK(s.frame(1)[2] == 0.6f);
  CHECK(kind_of([] { io::parse_csv_sequence("1,2\n3,x\n"); }) == ErrorKind::parse);
  CHECK(kind_of([] { io::parse_csv_sequence("1,2\n3\n"); }) == ErrorKind::shape);
  CHECK(kind_of([] { io::parse_csv_sequence("# nothing\n"); }) == ErrorKind::shape);
  CHECK(kind_of([] { io::parse_csv_sequence("1,inf\n"); }) == ErrorKind::numeric);
}

TEST_CASE("hardware configs round trip and override presets") {
  for (const auto& name : arch::HardwareConfig::preset_names()) {
    const auto cfg = arch::HardwareConfig::preset(name);
    CHECK(io::to_json(io::config_from_json(io::to_json(cfg))) == io::to_json(cfg));
  }
  const auto cfg = io::config_from_json(io::json::parse(R"({"preset": "epur-mwl", "dpu_width": 32})"));
  CHECK(cfg.dpu_width == 32);
  CHECK(cfg.weight_mem_bytes_per_cu == 2 * arch::MiB);
  CHECK(kind_of([] { io::config_from_json(io::json::parse(R"({"dpu_wdith": 32})")); }) == ErrorKind::parse);

  const auto path = scratch("hw.json");
  io::write_atomic(path, R"({"preset": "epur", "energy": {"dynamic_j": {"mu.op": 2e-12}}})");
  const auto r = io::load_config(path);
  CHECK(r.energy.dynamic.at("mu.op") == 2e-12);
  CHECK(r.energy.dynamic.at("dram.read") == energy::EnergyTable::defaults().dynamic.at("dram.read"));
  CHECK(io::resolve_config("epur-mwl").hardware.default_policy == sched::Policy::mwl);
}

TEST_CASE("energy tables round trip") {
  const auto t = energy::EnergyTable::defaults();
  const auto back = io::energy_table_from_json(io::to_json(t));
  CHECK(back.dynamic == t.dynamic);
  CHECK(back.leakage == t.leakage);
  CHECK(back.leakage_per_byte == t.leakage_per_byte);
}

TEST_CASE("trace CSV has one line per event") {
  const auto tr = sched::trace_conventional({2, 2, Direction::forward_only, false}, Precision::fp32, 2);
  std::ostringstream os;
  io::write_trace_csv(os, tr[0], true);
  const auto text = os.str();
  CHECK(text.rfind("layer,direction,target,object_id,rw,bytes,t,neuron\n", 0) == 0);
  CHECK(std::size_t(std::count(text.begin(), text.end(), '\n')) == tr[0].events.size() + 1);
}

TEST_CASE("atomic writes leave no temporary files") {
  const auto path = scratch("atomic.txt");
  io::write_atomic(path, "one");
  io::write_atomic(path, "two");
  CHECK(io::read_file(path) == "two");
  int files = 0;
  for (const auto& e : fs::directory_iterator(path.parent_path()))
    if (e.path().filename().string().find("atomic") != std::string::npos) ++files;
  CHECK(files == 1);
}
