// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "wavevid/cli.hpp"

int main(int argc, char** argv) { return wavevid::run_cli(argc, argv, std::cout, std::cerr); }
