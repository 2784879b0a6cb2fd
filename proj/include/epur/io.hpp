// SPDX-License-Identifier: Apache-2.0
//
// File formats: network descriptor and hardware config (JSON), weight blob,
// input sequences (binary or CSV), trace CSV, and atomic report writes.
//
// Weight blob layout, all little endian:
//   offset 0   char[4]  "EPRW"
//   offset 4   u16      version (1)
//   offset 6   u16      precision (0 = fp32, 1 = fp16)
//   offset 8   u64      number of values
//   offset 16  values, 4 or 2 bytes each, per layer, per direction, per gate
//              (input, forget, cell_updater, output): W_gx row-major, W_gh
//              row-major, b_g, then the peephole vector when the layer has
//              peepholes and the gate is not the cell updater.
//
// Input sequence: u32 T, u32 dim, then T*dim f32 values frame by frame.
#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "epur/arch.hpp"
#include "epur/energy.hpp"
#include "epur/model.hpp"
#include "epur/sched.hpp"

namespace epur::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline constexpr char kWeightMagic[4] = {'E', 'P', 'R', 'W'};
inline constexpr std::uint16_t kWeightVersion = 1;

std::string read_file(const fs::path& path);
/// Writes to a sibling temporary file, then renames it over the target.
void write_atomic(const fs::path& path, std::string_view content);

json to_json(const NetworkDescriptor& net);
NetworkDescriptor network_from_json(const json& j);
NetworkDescriptor load_network(const fs::path& path);

json to_json(const arch::HardwareConfig& cfg);
/// Starts from the "preset" named in the document (default "epur") and
/// overrides the fields present. Unknown keys are rejected.
arch::HardwareConfig config_from_json(const json& j);
json to_json(const energy::EnergyTable& t);
energy::EnergyTable energy_table_from_json(const json& j);

/// A hardware config file may carry an "energy" table next to the
/// architectural parameters.
struct ResolvedConfig {
  arch::HardwareConfig hardware;
  energy::EnergyTable energy = energy::EnergyTable::defaults();
};
ResolvedConfig load_config(const fs::path& path);
ResolvedConfig resolve_config(const std::string& preset_or_path);

std::string encode_weights(const NetworkDescriptor& net, const NetworkWeights& weights);
NetworkWeights decode_weights(const NetworkDescriptor& net, std::string_view blob);
NetworkWeights load_weights(const NetworkDescriptor& net, const fs::path& path);

std::string encode_sequence(const Sequence& s);
Sequence decode_sequence(std::string_view bytes);
Sequence parse_csv_sequence(std::string_view text);
/// ".csv" files are parsed as text, anything else as the binary format.
Sequence load_sequence(const fs::path& path);

void write_trace_csv(std::ostream& os, const sched::AccessTrace& trace, bool header);

}  // namespace epur::io
