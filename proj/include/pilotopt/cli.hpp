// SPDX-License-Identifier: Apache-2.0
//
// pilotopt - successive LMI pilot design for multi-cell Massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pilotopt/config.hpp"

namespace pilotopt {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kConfig = 2;
inline constexpr int kSolver = 3;
inline constexpr int kIo = 4;
}  // namespace exit_code

/// One fully resolved invocation: the effective configuration (file plus
/// command-line overrides) and the subcommand's own arguments.
struct Invocation {
  std::string command;  // gen-network | optimize | evaluate | reproduce
  std::string figure;   // reproduce only
  std::filesystem::path pilots_file;  // evaluate only, optional
  std::filesystem::path out_dir;
  std::string config_source;
  RunConfig config;
  int jobs = 1;
};

/// Writes manifest.json into inv.out_dir, then runs the command there.
/// Throws on failure; see run_cli for the exit-code mapping.
void execute(const Invocation& inv, std::ostream& log);

/// Rebuilds the invocation recorded in a manifest.
Invocation invocation_from_manifest(const std::filesystem::path& manifest_path);

/// Full command-line entry point; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pilotopt
