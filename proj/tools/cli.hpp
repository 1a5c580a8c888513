// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hstream::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

inline constexpr const char* kRunConfigFile = "run_config.json";
inline constexpr const char* kSeedEnv = "HSTREAM_SEED";

/// Runs one command line (without the program name). Returns the exit code:
/// 0 success, 1 usage error, 2 data or contract error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hstream::cli
