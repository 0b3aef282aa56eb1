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

#include <cstdint>
#include <optional>
#include <vector>

#include "pilotopt/common.hpp"

namespace pilotopt {

/// Scalar parameters of the network and of one experiment.
///
/// Every power is linear mW; dB values only appear when reading or writing
/// configuration files and CSV outputs.
struct SystemConfig {
  int num_cells = 4;
  int num_antennas = 500;
  int num_users = 10;
  int pilot_length = 10;

  double per_symbol_power_mw = 200.0;
  // Unset means per_symbol_power_mw * pilot_length, so a pilot-length sweep keeps the budget coupled.
  std::optional<double> pilot_power_budget_mw;
  double noise_variance_mw = 2.5118864315095796e-10;  // -96 dBm

  double cell_side_km = 0.25;
  double min_distance_km = 0.035;
  double shadowing_std_db = 7.0;
  double pathloss_intercept_db = -148.1;
  double pathloss_exponent_db = 37.6;

  int mc_realizations = 200;
  std::uint64_t rng_seed = 1;

  // uplink data phase used by the spectral-efficiency metric
  double data_power_mw = 200.0;
  int coherence_length = 200;
  int se_draws = 2000;

  double pilot_power_budget() const {
    return pilot_power_budget_mw.value_or(per_symbol_power_mw * pilot_length);
  }

  /// Throws ConfigError describing the first violated invariant.
  void validate() const;
};

struct Point {
  double x_km = 0.0;
  double y_km = 0.0;
};

/// Rows x cols layout of square cells on the torus.
struct GridShape {
  int rows = 1;
  int cols = 1;
};

/// User positions and large-scale fading for one Monte-Carlo drop.
///
/// Link (c, b) means "users of cell c as seen by the BS of cell b"; its
/// large-scale gains are the diagonal of D_{c,b}.
struct NetworkRealization {
  int num_cells = 0;
  int num_users = 0;
  double torus_width_km = 0.0;
  double torus_height_km = 0.0;
  std::vector<Point> bs_positions;    // [cell]
  std::vector<Point> user_positions;  // [cell * num_users + user]
  std::vector<VectorXd> distance_km;  // [user_cell * num_cells + bs], length num_users
  std::vector<VectorXd> large_scale;  // [user_cell * num_cells + bs], length num_users

  const VectorXd& gains(int user_cell, int bs) const {
    return large_scale[static_cast<std::size_t>(user_cell * num_cells + bs)];
  }
  const VectorXd& distances(int user_cell, int bs) const {
    return distance_km[static_cast<std::size_t>(user_cell * num_cells + bs)];
  }
  const Point& user(int cell, int n) const {
    return user_positions[static_cast<std::size_t>(cell * num_users + n)];
  }
};

/// Path loss in dB without shadowing: intercept - slope * log10(d).
double pathloss_db(double distance_km, double intercept_db = -148.1, double slope_db = 37.6);
double pathloss_db(double distance_km, const SystemConfig& config);

GridShape torus_grid(int num_cells);

/// Shortest distance between two points on a width x height torus.
double wrapped_distance_km(const Point& a, const Point& b, double width_km, double height_km);

/// Draws one network: BSs at cell centres of a torus grid, users uniform in
/// their own cell subject to the minimum wrap-around distance to every BS,
/// independent log-normal shadowing per user-BS link.
NetworkRealization generate_network(const SystemConfig& config, std::uint64_t seed);

double noise_variance_mw(const SystemConfig& config);

/// Builds a realization from explicit gains, for tests and analytic cases.
/// gains[c * C + b] must hold num_users positive entries.
NetworkRealization make_network_from_gains(int num_cells, int num_users,
                                           std::vector<VectorXd> gains);

}  // namespace pilotopt
