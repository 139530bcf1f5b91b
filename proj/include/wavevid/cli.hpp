// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace wavevid {

// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Runs one `wavevid` command line. Normal output goes to `out`, diagnostics
// and usage text to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wavevid
