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

#include "pilotopt/network.hpp"

#include <cmath>
#include <string>

namespace pilotopt {

namespace {

constexpr int kMaxPlacementRetries = 1000;

}  // namespace

void SystemConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid configuration: " + what); };
  if (num_cells < 1) fail("num_cells must be >= 1");
  if (num_antennas < 1) fail("num_antennas must be >= 1");
  if (num_users < 1) fail("num_users must be >= 1");
  if (pilot_length < 1) fail("pilot_length must be >= 1");
  if (!(per_symbol_power_mw >= 0.0)) fail("per_symbol_power_mw must be >= 0");
  if (!(pilot_power_budget() > 0.0)) fail("pilot power budget must be > 0");
  if (!(noise_variance_mw > 0.0) || !std::isfinite(noise_variance_mw)) {
    fail("noise variance must be positive and finite");
  }
  if (!(cell_side_km > 0.0)) fail("cell_side_km must be > 0");
  if (!(min_distance_km > 0.0)) fail("min_distance_km must be > 0");
  if (!(min_distance_km < 0.5 * cell_side_km)) fail("min_distance_km must be < cell_side_km / 2");
  if (!(shadowing_std_db >= 0.0)) fail("shadowing_std_db must be >= 0");
  if (mc_realizations < 1) fail("mc_realizations must be >= 1");
  if (!(data_power_mw >= 0.0)) fail("data_power_mw must be >= 0");
  if (coherence_length <= pilot_length) fail("coherence_length must exceed pilot_length");
  if (se_draws < 1) fail("se_draws must be >= 1");
}

double pathloss_db(double distance_km, double intercept_db, double slope_db) {
  if (!(distance_km > 0.0)) {
    throw std::domain_error("pathloss_db: distance must be positive, got " +
                            std::to_string(distance_km));
  }
  return intercept_db - slope_db * std::log10(distance_km);
}

double pathloss_db(double distance_km, const SystemConfig& config) {
  return pathloss_db(distance_km, config.pathloss_intercept_db, config.pathloss_exponent_db);
}

GridShape torus_grid(int num_cells) {
  if (num_cells < 1) throw ContractError("torus_grid: need at least one cell");
  int rows = static_cast<int>(std::floor(std::sqrt(static_cast<double>(num_cells))));
  while (num_cells % rows != 0) --rows;
  return {rows, num_cells / rows};
}

double wrapped_distance_km(const Point& a, const Point& b, double width_km, double height_km) {
  auto wrap = [](double d, double period) {
    d = std::fabs(d);
    d = std::fmod(d, period);
    return std::min(d, period - d);
  };
  const double dx = wrap(a.x_km - b.x_km, width_km);
  const double dy = wrap(a.y_km - b.y_km, height_km);
  return std::hypot(dx, dy);
}

NetworkRealization generate_network(const SystemConfig& config, std::uint64_t seed) {
  config.validate();
  const int C = config.num_cells;
  const int N = config.num_users;
  const double side = config.cell_side_km;
  const GridShape grid = torus_grid(C);

  NetworkRealization net;
  net.num_cells = C;
  net.num_users = N;
  net.torus_width_km = grid.cols * side;
  net.torus_height_km = grid.rows * side;

  net.bs_positions.resize(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c) {
    const int row = c / grid.cols;
    const int col = c % grid.cols;
    net.bs_positions[static_cast<std::size_t>(c)] = {(col + 0.5) * side, (row + 0.5) * side};
  }

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  net.user_positions.resize(static_cast<std::size_t>(C * N));
  for (int c = 0; c < C; ++c) {
    const Point& centre = net.bs_positions[static_cast<std::size_t>(c)];
    for (int n = 0; n < N; ++n) {
      bool placed = false;
      for (int attempt = 0; attempt < kMaxPlacementRetries && !placed; ++attempt) {
        const Point p{centre.x_km + (unit(rng) - 0.5) * side, centre.y_km + (unit(rng) - 0.5) * side};
        placed = true;
        for (const Point& bs : net.bs_positions) {
          if (wrapped_distance_km(p, bs, net.torus_width_km, net.torus_height_km) <
              config.min_distance_km) {
            placed = false;
            break;
          }
        }
        if (placed) net.user_positions[static_cast<std::size_t>(c * N + n)] = p;
      }
      if (!placed) {
        throw ConfigError("generate_network: could not place user " + std::to_string(n) +
                          " of cell " + std::to_string(c) + " after " +
                          std::to_string(kMaxPlacementRetries) + " attempts");
      }
    }
  }

  std::normal_distribution<double> shadow(0.0, config.shadowing_std_db);
  net.distance_km.resize(static_cast<std::size_t>(C * C));
  net.large_scale.resize(static_cast<std::size_t>(C * C));
  for (int c = 0; c < C; ++c) {
    for (int b = 0; b < C; ++b) {
      VectorXd dist(N);
      VectorXd gain(N);
      for (int n = 0; n < N; ++n) {
        dist(n) = wrapped_distance_km(net.user(c, n), net.bs_positions[static_cast<std::size_t>(b)],
                                      net.torus_width_km, net.torus_height_km);
        const double z = config.shadowing_std_db > 0.0 ? shadow(rng) : 0.0;
        gain(n) = db_to_linear(pathloss_db(dist(n), config) + z);
      }
      net.distance_km[static_cast<std::size_t>(c * C + b)] = std::move(dist);
      net.large_scale[static_cast<std::size_t>(c * C + b)] = std::move(gain);
    }
  }
  return net;
}

double noise_variance_mw(const SystemConfig& config) { return config.noise_variance_mw; }

NetworkRealization make_network_from_gains(int num_cells, int num_users,
                                           std::vector<VectorXd> gains) {
  if (num_cells < 1 || num_users < 1) throw ContractError("make_network_from_gains: empty network");
  if (gains.size() != static_cast<std::size_t>(num_cells * num_cells)) {
    throw ContractError("make_network_from_gains: need num_cells^2 gain vectors");
  }
  for (const VectorXd& g : gains) {
    if (g.size() != num_users || !(g.array() > 0.0).all()) {
      throw ContractError("make_network_from_gains: each link needs num_users positive gains");
    }
  }
  NetworkRealization net;
  net.num_cells = num_cells;
  net.num_users = num_users;
  net.bs_positions.assign(static_cast<std::size_t>(num_cells), Point{});
  net.user_positions.assign(static_cast<std::size_t>(num_cells * num_users), Point{});
  net.distance_km.assign(gains.size(), VectorXd::Zero(num_users));
  net.large_scale = std::move(gains);
  return net;
}

}  // namespace pilotopt
