// SPDX-License-Identifier: Apache-2.0
//
// JSON and aligned-column text renderings of the simulator's results.
#pragma once

#include <string>
#include <vector>

#include "epur/arch.hpp"
#include "epur/energy.hpp"
#include "epur/io.hpp"
#include "epur/sched.hpp"

namespace epur::report {

using io::json;

/// Left-aligned first column, right-aligned numbers.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }
  std::string render() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string fixed(double v, int digits);
std::string sci(double v);

json to_json(const sched::AccessCounts& c);
json to_json(const sched::DramTrafficReport& d);
json to_json(const sched::ReuseStats& s);
json to_json(const arch::SimReport& r, bool with_outputs);
json to_json(const energy::EnergyReport& e);
json to_json(const energy::Comparison& c);

std::string text(const arch::SimReport& r);
std::string text(const energy::EnergyReport& e);
std::string text(const energy::Comparison& c, const std::string& a, const std::string& b);
std::string text(const sched::ReuseStats& s);

}  // namespace epur::report
