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
#include <vector>

#include "pilotopt/common.hpp"
#include "pilotopt/network.hpp"

namespace pilotopt {

/// One tau x N pilot matrix per cell; column n is the pilot of user n.
/// Entries are in sqrt(mW), so |x|^2 is a power in mW.
struct PilotSet {
  std::vector<MatrixXcd> pilots;

  static PilotSet zeros(int num_cells, int pilot_length, int num_users);

  int num_cells() const { return static_cast<int>(pilots.size()); }
  int pilot_length() const { return pilots.empty() ? 0 : static_cast<int>(pilots.front().rows()); }
  int num_users() const { return pilots.empty() ? 0 : static_cast<int>(pilots.front().cols()); }

  const MatrixXcd& operator[](int cell) const { return pilots[static_cast<std::size_t>(cell)]; }
  MatrixXcd& operator[](int cell) { return pilots[static_cast<std::size_t>(cell)]; }

  /// Throws ContractError unless every matrix is tau x N with the same tau, N.
  void check_shape() const;

  /// Largest eigenvalue of X^H X for one cell (its squared spectral norm).
  double max_gram_eigenvalue(int cell) const;

  /// lambda_max(X_c^H X_c) <= p_max + tol for every cell.
  bool feasible(double p_max, double tol = 1e-9) const;
};

/// Small-scale fading and receiver noise for one coherence block.
///
/// small_scale[c * C + b] is H_{c,b} (N x M, i.i.d. CN(0,1)); noise[b] is V_b
/// (tau x M, i.i.d. CN(0, noise variance)).
struct ChannelRealization {
  int num_cells = 0;
  std::vector<MatrixXcd> small_scale;
  std::vector<MatrixXcd> noise;

  const MatrixXcd& channel(int user_cell, int bs) const {
    return small_scale[static_cast<std::size_t>(user_cell * num_cells + bs)];
  }
};

struct EstimateBundle {
  MatrixXcd estimate;  // N x M
  MatrixXcd error;     // true channel - estimate
  double analytic_mse = 0.0;
};

struct MonteCarloMean {
  double mean = 0.0;
  double standard_error = 0.0;
};

ChannelRealization draw_channel_realization(int num_cells, int num_users, int num_antennas,
                                            int pilot_length, double noise_var, Rng& rng);

/// Y_b = sum_c X_c D_{c,b}^{1/2} H_{c,b} + V_b.
MatrixXcd received_training(const PilotSet& pilots, const NetworkRealization& net,
                            const ChannelRealization& ch, int cell);

/// F_b = sum_{c != b} X_c D_{c,b} X_c^H + noise_var * I.
MatrixXcd interference_matrix(const PilotSet& pilots, const NetworkRealization& net, int cell,
                              double noise_var);

/// Received pilot covariance per antenna, sum_c X_c D_{c,b} X_c^H + noise_var * I.
/// (The per-BS covariance of the stacked signal is M times this.)
MatrixXcd training_covariance(const PilotSet& pilots, const NetworkRealization& net, int cell,
                              double noise_var);

/// N x tau linear MMSE filter W with estimate = W * Y. Independent of M.
MatrixXcd mmse_filter(const PilotSet& pilots, const NetworkRealization& net, int cell,
                      double noise_var);

MatrixXcd mmse_estimate(const MatrixXcd& received, const PilotSet& pilots,
                        const NetworkRealization& net, int cell, double noise_var);

EstimateBundle estimate_channel(const PilotSet& pilots, const NetworkRealization& net,
                                const ChannelRealization& ch, int cell, double noise_var);

/// Estimation MSE evaluated through the A/B/C/D matrix-inversion-lemma form,
/// M * Tr(A^-1 - A^-1 B (C^-1 + D A^-1 B)^-1 D A^-1).
double mse_direct(const PilotSet& pilots, const NetworkRealization& net, int cell,
                  int num_antennas, double noise_var);

/// f(X) = M * Tr((I_N + D^{1/2} X^H F^-1 X D^{1/2})^-1). Lies in (0, M*N].
double mse_woodbury(const PilotSet& pilots, const NetworkRealization& net, int cell,
                    int num_antennas, double noise_var);

/// Sample mean of ||H - H_hat||_F^2 over independent channel and noise draws.
MonteCarloMean empirical_mse(const PilotSet& pilots, const NetworkRealization& net, int cell,
                             int num_antennas, double noise_var, int n_draws, std::uint64_t seed);

/// Cholesky-based inverse of a Hermitian positive-definite matrix.
/// Throws NumericalError if the factorization fails.
MatrixXcd hermitian_pd_inverse(const MatrixXcd& m, const char* what);

}  // namespace pilotopt
