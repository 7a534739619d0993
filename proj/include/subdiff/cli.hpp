// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace subdiff {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitBugsFound = 3,
};

/// Runs the tool with `args` (without the program name). Progress and the
/// final status line go to `err`; help text goes to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace subdiff
