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

#include <cmath>
#include <random>

#include "pilotopt/estimation.hpp"
#include "pilotopt/network.hpp"

namespace pilotopt::testing {

/// Gains in [lo, hi] (linear) for every link, drawn log-uniformly.
inline NetworkRealization random_gain_network(int cells, int users, Rng& rng, double lo = 1e-3,
                                              double hi = 1e3) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  std::vector<VectorXd> gains;
  for (int i = 0; i < cells * cells; ++i) {
    VectorXd g(users);
    for (int n = 0; n < users; ++n) g(n) = std::exp(u(rng));
    gains.push_back(g);
  }
  return make_network_from_gains(cells, users, std::move(gains));
}

inline NetworkRealization uniform_gain_network(int cells, int users, double phi) {
  std::vector<VectorXd> gains(static_cast<std::size_t>(cells * cells), VectorXd::Constant(users, phi));
  return make_network_from_gains(cells, users, std::move(gains));
}

/// Random pilots rescaled so every cell satisfies lambda_max(X^H X) <= p_max.
inline PilotSet random_feasible_pilots(int cells, int tau, int users, double p_max, Rng& rng) {
  PilotSet p;
  std::uniform_real_distribution<double> frac(0.05, 1.0);
  for (int c = 0; c < cells; ++c) {
    MatrixXcd x = complex_normal_matrix(rng, tau, users);
    const double lam = (x.adjoint() * x).selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();
    x *= std::sqrt(frac(rng) * p_max / lam);
    p.pilots.push_back(x);
  }
  return p;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace pilotopt::testing
