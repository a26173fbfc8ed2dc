// SPDX-License-Identifier: Apache-2.0

#include "permverify/cli.hpp"

int main(int argc, char** argv) { return permverify::cli::main(argc, argv); }
