// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>

#include "epur/error.hpp"

namespace epur::cli {

enum ExitCode : int {
  kOk = 0,
  kIo = 2,
  kParse = 3,
  kCapacity = 4,
  kNumeric = 5,
  kShape = 6,
  kConfig = 7,
  kRange = 8,
  kInvariant = 9,
  kUsage = 64,
};

int exit_code(ErrorKind kind);

/// The whole command-line tool. Text goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace epur::cli
