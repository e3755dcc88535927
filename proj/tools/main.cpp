// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "swast/cli.hpp"

int main(int argc, char** argv) { return swast::cli_main(argc, argv, std::cout, std::cerr); }
