// Copyright 2026 The trimotion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRIMOTION_TOOLS_COMMANDS_H_
#define TRIMOTION_TOOLS_COMMANDS_H_

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace trimotion::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

// Environment variable that overrides where relative manifest paths resolve.
inline constexpr const char* kDataRootEnv = "TRIMOTION_DATA_ROOT";

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Applies `--a.b value` / `--a.b=value` pairs to a config tree. Values parse
// as JSON when they can and fall back to strings. Throws InvalidInput.
void apply_overrides(nlohmann::json& config, const std::vector<std::string>& args);

}  // namespace trimotion::cli

#endif  // TRIMOTION_TOOLS_COMMANDS_H_
