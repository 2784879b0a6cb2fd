// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "epur/cli.hpp"

int main(int argc, char** argv) { return epur::cli::run(argc, argv, std::cout, std::cerr); }
