// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "subdiff/cli.hpp"

int main(int argc, char** argv) {
  return subdiff::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
