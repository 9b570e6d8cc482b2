// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "srr/config.hpp"

namespace srr {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitConfig = 3,
  kExitEmpty = 4,
  kExitProvider = 5,
};

/// Entry point behind the `srr` binary. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, const EnvMap& env, std::ostream& out, std::ostream& err);

}  // namespace srr
