// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "epur/cli.hpp"
#include "epur/io.hpp"

using namespace epur;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "epur");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path dir() {
  const auto d = fs::temp_directory_path() / "epur_test_cli";
  fs::create_directories(d);
  return d;
}

std::string at(const char* name) { return (dir() / name).string(); }

io::json report(const char* name) { return io::json::parse(io::read_file(at(name))); }

}  // namespace

TEST_CASE("gen-network is deterministic") {
  for (const char* blob : {"a.bin", "b.bin"}) {
    const auto r = run({"gen-network", "--preset", "LDLRNN", "--seed", "5", "--out-network",
                        at("ldlrnn.json"), "--out-weights", at(blob)});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("LDLRNN: 2 layers x 128 neurons") != std::string::npos);
  }
  CHECK(io::read_file(at("a.bin")) == io::read_file(at("b.bin")));
  const auto net = io::load_network(at("ldlrnn.json"));
  CHECK(net.layers.size() == 2);
  CHECK(!net.layers[0].peephole);
}

TEST_CASE("gen-network reports the preset footprint") {
  const auto r = run({"gen-network", "--preset", "EESEN", "--report", at("eesen.json")});
  REQUIRE(r.code == 0);
  const auto j = report("eesen.json");
  CHECK(j["network"]["layers"].size() == 5);
  CHECK(j["network"]["layers"][0]["direction"] == "bidirectional");
  CHECK(j["network"]["layers"][0]["peephole"] == true);
  CHECK(j["published_mb"] == 42.0);
  CHECK(run({"gen-network", "--preset", "NOPE"}).code == cli::kConfig);
}

TEST_CASE("simulate passes its oracle check and embeds the resolved config") {
  REQUIRE(run({"gen-network", "--layers", "2", "--hidden", "12", "--input-dim", "7", "--peephole",
               "--bidirectional", "--out-network", at("small.json"), "--out-weights", at("small.bin"),
               "--out-input", at("small.seq"), "--input-length", "5"})
              .code == 0);
  for (const char* policy : {"conventional", "mwl"}) {
    const auto r = run({"simulate", "--network", at("small.json"), "--weights", at("small.bin"),
                        "--input", at("small.seq"), "--policy", policy, "--no-quantize", "--report",
                        at("sim.json")});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("oracle check: passed (bit identical yes") != std::string::npos);
    const auto j = report("sim.json");
    CHECK(j["oracle_check"]["passed"] == true);
    CHECK(j["hardware"].contains("dpu_width"));
    CHECK(j["energy_table"].contains("dynamic_j"));
    CHECK(j["options"]["policy"] == policy);
    CHECK(j["report"]["cycles"].get<std::uint64_t>() > 0);
  }
  const auto q = run({"simulate", "--network", at("small.json"), "--weights", at("small.bin"),
                      "--input", at("small.seq"), "--preset", "epur-mwl", "--calibrate", "--report",
                      at("q.json")});
  CHECK(q.code == 0);
  const auto j = report("q.json");
  CHECK(j["options"]["policy"] == "mwl");
  CHECK(j["options"]["quantize"] == true);
  CHECK(j["oracle_check"]["cosine_similarity"].get<double>() > 0.999);
  CHECK(j["options"]["alpha"].get<double>() < 20.0);
}

TEST_CASE("compare prints the weight-buffer ratio of a square layer") {
  REQUIRE(run({"gen-network", "--layers", "1", "--hidden", "32", "--input-dim", "32",
               "--out-network", at("square.json")})
              .code == 0);
  const auto r = run({"compare", "--network", at("square.json"), "--length", "100",
                      "--policy-a", "conventional", "--policy-b", "mwl", "--report", at("cmp.json")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("ratio 0.5050") != std::string::npos);
  CHECK(report("cmp.json")["weight_buffer_read_ratio"].get<double>() == doctest::Approx(0.505));
}

TEST_CASE("a malformed descriptor exits with the parse code and writes nothing") {
  io::write_atomic(at("broken.json"), "{\"input_dim\": 4, \"layers\": [ {\"hidden_size\": }");
  fs::remove(at("never.json"));
  const auto r = run({"simulate", "--network", at("broken.json"), "--length", "3", "--report",
                      at("never.json")});
  CHECK(r.code == cli::kParse);
  CHECK(!fs::exists(at("never.json")));
  CHECK(r.err.find("broken.json") != std::string::npos);
}

TEST_CASE("distinct exit codes") {
  CHECK(run({"simulate", "--network", at("missing.json"), "--length", "2"}).code == cli::kIo);
  CHECK(run({"simulate", "--preset", "EESEN", "--length", "2", "--hw", "tpu"}).code == cli::kConfig);
  CHECK(run({"simulate", "--preset", "GMAT", "--length", "2", "--timing-only", "--policy",
             "conventional", "--hw", "epur-mwl"})
            .code == cli::kCapacity);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  CHECK(cli::exit_code(ErrorKind::shape) == cli::kShape);
  CHECK(cli::exit_code(ErrorKind::numeric) == cli::kNumeric);
  CHECK(cli::exit_code(ErrorKind::range) == cli::kRange);
  CHECK(cli::exit_code(ErrorKind::invariant) == cli::kInvariant);
}

TEST_CASE("analyze-reuse and quantize-sweep") {
  const auto r = run({"analyze-reuse", "--network", at("square.json"), "--length", "4", "--report",
                      at("reuse.json")});
  REQUIRE(r.code == 0);
  CHECK(!report("reuse.json").empty());
  const auto s = run({"quantize-sweep", "--network", at("square.json"), "--length", "6", "--bits",
                      "4", "8", "--report", at("sweep.json")});
  REQUIRE(s.code == 0);
  CHECK(report("sweep.json")["sweep"].size() == 2);
}
