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
#include <string>
#include <vector>

#include "pilotopt/optimizer.hpp"

namespace pilotopt {

/// Everything a config file can set. Keys and units are listed in README.md.
struct RunConfig {
  SystemConfig system;
  OptimizerParams optimizer;
  double noise_variance_dbm = -96.0;
  std::vector<int> pilot_lengths{6, 10, 16};  // sweep used by `reproduce`

  /// Recomputes derived fields (noise in mW) and validates everything.
  void finalize();
};

/// Parses a flat YAML mapping. Unknown keys, wrong types and invalid values
/// raise ConfigError naming the key.
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>");

/// Reads and parses a file; an unreadable path raises IoError naming it.
RunConfig load_config(const std::filesystem::path& path);

/// Flat YAML with every key, doubles written to round-trip exactly.
std::string emit_config(const RunConfig& config);

}  // namespace pilotopt
