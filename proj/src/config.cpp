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

#include "pilotopt/config.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "pilotopt/io.hpp"

namespace pilotopt {

namespace {

[[noreturn]] void bad(const std::string& origin, const std::string& key, const std::string& what) {
  throw ConfigError(origin + ": key '" + key + "': " + what);
}

double as_double(const YAML::Node& n, const std::string& origin, const std::string& key) {
  if (!n.IsScalar()) bad(origin, key, "expected a number");
  const std::string& s = n.Scalar();
  if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    bad(origin, key, "expected a number, got '" + s + "'");
  }
}

template <typename Int>
Int as_int(const YAML::Node& n, const std::string& origin, const std::string& key) {
  if (!n.IsScalar()) bad(origin, key, "expected an integer");
  try {
    return n.as<Int>();
  } catch (const YAML::Exception&) {
    bad(origin, key, "expected an integer, got '" + n.Scalar() + "'");
  }
}

std::string as_string(const YAML::Node& n, const std::string& origin, const std::string& key) {
  if (!n.IsScalar()) bad(origin, key, "expected a string");
  return n.Scalar();
}

using Setter = std::function<void(RunConfig&, const YAML::Node&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto integer = [&t](const std::string& key, int SystemConfig::*field) {
      t[key] = [key, field](RunConfig& c, const YAML::Node& n, const std::string& o) {
        c.system.*field = as_int<int>(n, o, key);
      };
    };
    auto real = [&t](const std::string& key, double SystemConfig::*field) {
      t[key] = [key, field](RunConfig& c, const YAML::Node& n, const std::string& o) {
        c.system.*field = as_double(n, o, key);
      };
    };
    integer("num_cells", &SystemConfig::num_cells);
    integer("num_antennas", &SystemConfig::num_antennas);
    integer("num_users", &SystemConfig::num_users);
    integer("pilot_length", &SystemConfig::pilot_length);
    integer("mc_realizations", &SystemConfig::mc_realizations);
    integer("coherence_length", &SystemConfig::coherence_length);
    integer("se_draws", &SystemConfig::se_draws);
    real("per_symbol_power_mw", &SystemConfig::per_symbol_power_mw);
    real("cell_side_km", &SystemConfig::cell_side_km);
    real("min_distance_km", &SystemConfig::min_distance_km);
    real("shadowing_std_db", &SystemConfig::shadowing_std_db);
    real("pathloss_intercept_db", &SystemConfig::pathloss_intercept_db);
    real("pathloss_exponent_db", &SystemConfig::pathloss_exponent_db);
    real("data_power_mw", &SystemConfig::data_power_mw);

    t["pilot_power_budget_mw"] = [](RunConfig& c, const YAML::Node& n, const std::string& o) {
      if (n.IsNull()) {
        c.system.pilot_power_budget_mw.reset();
      } else {
        c.system.pilot_power_budget_mw = as_double(n, o, "pilot_power_budget_mw");
      }
    };
    t["noise_variance_dbm"] = [](RunConfig& c, const YAML::Node& n, const std::string& o) {
      c.noise_variance_dbm = as_double(n, o, "noise_variance_dbm");
    };
    t["rng_seed"] = [](RunConfig& c, const YAML::Node& n, const std::string& o) {
      c.system.rng_seed = as_int<std::uint64_t>(n, o, "rng_seed");
    };
    t["pilot_lengths"] = [](RunConfig& c, const YAML::Node& n, const std::string& o) {
      if (!n.IsSequence() || n.size() == 0) bad(o, "pilot_lengths", "expected a nonempty list");
      c.pilot_lengths.clear();
      for (const auto& item : n) c.pilot_lengths.push_back(as_int<int>(item, o, "pilot_lengths"));
    };
    t["delta"] = [](RunConfig& c, const YAML::Node& n, const std::string& o) {
      c.optimizer.delta = as_double(n, o, "delta");
    };
    t["max_iterations"] = [](RunConfig& c, const YAML::Node& n, const std::string& o) {
      c.optimizer.max_iterations = as_int<int>(n, o, "max_iterations");
    };
    t["eps_solver"] = [](RunConfig& c, const YAML::Node& n, const std::string& o) {
      c.optimizer.eps_solver = as_double(n, o, "eps_solver");
    };
    t["schedule"] = [](RunConfig& c, const YAML::Node& n, const std::string& o) {
      c.optimizer.schedule = parse_schedule(as_string(n, o, "schedule"));
    };
    t["initializer"] = [](RunConfig& c, const YAML::Node& n, const std::string& o) {
      c.optimizer.initializer = parse_initializer(as_string(n, o, "initializer"));
    };
    return t;
  }();
  return table;
}

}  // namespace

void RunConfig::finalize() {
  if (!std::isfinite(noise_variance_dbm)) throw ConfigError("noise_variance_dbm must be finite");
  system.noise_variance_mw = db_to_linear(noise_variance_dbm);
  system.validate();
  optimizer.validate();
  if (pilot_lengths.empty()) throw ConfigError("pilot_lengths must not be empty");
  for (int tau : pilot_lengths) {
    if (tau < 1) throw ConfigError("pilot_lengths entries must be >= 1");
  }
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  RunConfig config;
  if (!root.IsNull()) {
    if (!root.IsMap()) throw ConfigError(origin + ": expected a mapping of key: value pairs");
    const auto& table = setters();
    for (const auto& kv : root) {
      const std::string key = kv.first.as<std::string>();
      const auto it = table.find(key);
      if (it == table.end()) throw ConfigError(origin + ": unknown key '" + key + "'");
      it->second(config, kv.second, origin);
    }
  }
  try {
    config.finalize();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.string());
}

std::string emit_config(const RunConfig& c) {
  auto num = [](double v) {
    if (std::isinf(v)) return std::string(v > 0 ? ".inf" : "-.inf");
    return format_double(v);
  };
  const SystemConfig& s = c.system;
  std::ostringstream os;
  os << "num_cells: " << s.num_cells << '\n'
     << "num_antennas: " << s.num_antennas << '\n'
     << "num_users: " << s.num_users << '\n'
     << "pilot_length: " << s.pilot_length << '\n'
     << "per_symbol_power_mw: " << num(s.per_symbol_power_mw) << '\n'
     << "pilot_power_budget_mw: "
     << (s.pilot_power_budget_mw ? num(*s.pilot_power_budget_mw) : std::string("null")) << '\n'
     << "noise_variance_dbm: " << num(c.noise_variance_dbm) << '\n'
     << "cell_side_km: " << num(s.cell_side_km) << '\n'
     << "min_distance_km: " << num(s.min_distance_km) << '\n'
     << "shadowing_std_db: " << num(s.shadowing_std_db) << '\n'
     << "pathloss_intercept_db: " << num(s.pathloss_intercept_db) << '\n'
     << "pathloss_exponent_db: " << num(s.pathloss_exponent_db) << '\n'
     << "mc_realizations: " << s.mc_realizations << '\n'
     << "rng_seed: " << s.rng_seed << '\n'
     << "data_power_mw: " << num(s.data_power_mw) << '\n'
     << "coherence_length: " << s.coherence_length << '\n'
     << "se_draws: " << s.se_draws << '\n'
     << "pilot_lengths: [";
  for (std::size_t i = 0; i < c.pilot_lengths.size(); ++i) {
    os << (i ? ", " : "") << c.pilot_lengths[i];
  }
  os << "]\n"
     << "delta: " << num(c.optimizer.delta) << '\n'
     << "max_iterations: " << c.optimizer.max_iterations << '\n'
     << "eps_solver: " << num(c.optimizer.eps_solver) << '\n'
     << "schedule: " << to_string(c.optimizer.schedule) << '\n'
     << "initializer: " << to_string(c.optimizer.initializer) << '\n';
  return os.str();
}

}  // namespace pilotopt
