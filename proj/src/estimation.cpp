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

#include "pilotopt/estimation.hpp"

#include <cmath>
#include <string>

namespace pilotopt {

namespace {

void check_cell(const PilotSet& pilots, const NetworkRealization& net, int cell) {
  pilots.check_shape();
  if (pilots.num_cells() != net.num_cells || pilots.num_users() != net.num_users) {
    throw ContractError("pilot set does not match the network dimensions");
  }
  if (cell < 0 || cell >= net.num_cells) {
    throw ContractError("cell index " + std::to_string(cell) + " out of range");
  }
}

Eigen::LLT<MatrixXcd> factor_pd(const MatrixXcd& m, const char* what) {
  Eigen::LLT<MatrixXcd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string(what) + ": Hermitian matrix is not positive definite");
  }
  return llt;
}

// X_c D X_c^H for diagonal D given by its entries
MatrixXcd weighted_gram(const MatrixXcd& x, const VectorXd& d) {
  const MatrixXcd xs = x * d.cwiseSqrt().asDiagonal();
  return xs * xs.adjoint();
}

}  // namespace

PilotSet PilotSet::zeros(int num_cells, int pilot_length, int num_users) {
  PilotSet set;
  set.pilots.assign(static_cast<std::size_t>(num_cells), MatrixXcd::Zero(pilot_length, num_users));
  return set;
}

void PilotSet::check_shape() const {
  if (pilots.empty()) throw ContractError("pilot set is empty");
  const auto tau = pilots.front().rows();
  const auto n = pilots.front().cols();
  if (tau < 1 || n < 1) throw ContractError("pilot matrices must be non-empty");
  for (const MatrixXcd& x : pilots) {
    if (x.rows() != tau || x.cols() != n) {
      throw ContractError("pilot matrices must all have the same tau x N shape");
    }
  }
}

double PilotSet::max_gram_eigenvalue(int cell) const {
  const MatrixXcd gram = (*this)[cell].adjoint() * (*this)[cell];
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

bool PilotSet::feasible(double p_max, double tol) const {
  for (int c = 0; c < num_cells(); ++c) {
    if (max_gram_eigenvalue(c) > p_max + tol) return false;
  }
  return true;
}

MatrixXcd hermitian_pd_inverse(const MatrixXcd& m, const char* what) {
  return factor_pd(m, what).solve(MatrixXcd::Identity(m.rows(), m.cols()));
}

ChannelRealization draw_channel_realization(int num_cells, int num_users, int num_antennas,
                                            int pilot_length, double noise_var, Rng& rng) {
  ChannelRealization ch;
  ch.num_cells = num_cells;
  ch.small_scale.reserve(static_cast<std::size_t>(num_cells * num_cells));
  for (int i = 0; i < num_cells * num_cells; ++i) {
    ch.small_scale.push_back(complex_normal_matrix(rng, num_users, num_antennas));
  }
  ch.noise.reserve(static_cast<std::size_t>(num_cells));
  for (int b = 0; b < num_cells; ++b) {
    ch.noise.push_back(complex_normal_matrix(rng, pilot_length, num_antennas, noise_var));
  }
  return ch;
}

MatrixXcd received_training(const PilotSet& pilots, const NetworkRealization& net,
                            const ChannelRealization& ch, int cell) {
  check_cell(pilots, net, cell);
  if (ch.num_cells != net.num_cells) throw ContractError("channel realization has wrong cell count");
  const MatrixXcd& noise = ch.noise[static_cast<std::size_t>(cell)];
  if (noise.rows() != pilots.pilot_length()) throw ContractError("noise has wrong pilot length");
  MatrixXcd y = noise;
  for (int c = 0; c < net.num_cells; ++c) {
    const MatrixXcd& h = ch.channel(c, cell);
    if (h.rows() != net.num_users || h.cols() != noise.cols()) {
      throw ContractError("small-scale channel has wrong shape");
    }
    y.noalias() += pilots[c] * net.gains(c, cell).cwiseSqrt().asDiagonal() * h;
  }
  return y;
}

MatrixXcd interference_matrix(const PilotSet& pilots, const NetworkRealization& net, int cell,
                              double noise_var) {
  check_cell(pilots, net, cell);
  const int tau = pilots.pilot_length();
  MatrixXcd f = noise_var * MatrixXcd::Identity(tau, tau);
  for (int c = 0; c < net.num_cells; ++c) {
    if (c == cell) continue;
    f += weighted_gram(pilots[c], net.gains(c, cell));
  }
  return f;
}

MatrixXcd training_covariance(const PilotSet& pilots, const NetworkRealization& net, int cell,
                              double noise_var) {
  return interference_matrix(pilots, net, cell, noise_var) +
         weighted_gram(pilots[cell], net.gains(cell, cell));
}

MatrixXcd mmse_filter(const PilotSet& pilots, const NetworkRealization& net, int cell,
                      double noise_var) {
  // M D^{1/2} X^H (M R)^{-1} with R the per-antenna covariance; the factor M cancels.
  const MatrixXcd r = training_covariance(pilots, net, cell, noise_var);
  const auto llt = factor_pd(r, "mmse_filter");
  const MatrixXcd xd = pilots[cell] * net.gains(cell, cell).cwiseSqrt().asDiagonal();
  // W = (R^{-1} X D^{1/2})^H since R is Hermitian
  return llt.solve(xd).adjoint();
}

MatrixXcd mmse_estimate(const MatrixXcd& received, const PilotSet& pilots,
                        const NetworkRealization& net, int cell, double noise_var) {
  if (received.rows() != pilots.pilot_length()) {
    throw ContractError("mmse_estimate: received signal must have tau rows");
  }
  return mmse_filter(pilots, net, cell, noise_var) * received;
}

EstimateBundle estimate_channel(const PilotSet& pilots, const NetworkRealization& net,
                                const ChannelRealization& ch, int cell, double noise_var) {
  const MatrixXcd y = received_training(pilots, net, ch, cell);
  EstimateBundle out;
  out.estimate = mmse_estimate(y, pilots, net, cell, noise_var);
  out.error = ch.channel(cell, cell) - out.estimate;
  out.analytic_mse = mse_woodbury(pilots, net, cell, static_cast<int>(y.cols()), noise_var);
  return out;
}

double mse_direct(const PilotSet& pilots, const NetworkRealization& net, int cell,
                  int num_antennas, double noise_var) {
  check_cell(pilots, net, cell);
  const double m = num_antennas;
  const int n = pilots.num_users();
  const VectorXd sqrt_d = net.gains(cell, cell).cwiseSqrt();
  const MatrixXcd& x = pilots[cell];

  // A^{-1} = I_N, B = M D^{1/2} X^H, D = X D^{1/2}, C^{-1} = M F
  const MatrixXcd b = m * sqrt_d.asDiagonal() * x.adjoint();
  const MatrixXcd d = x * sqrt_d.asDiagonal();
  const MatrixXcd c_inv = m * interference_matrix(pilots, net, cell, noise_var);
  const MatrixXcd inner = c_inv + d * b;
  const auto llt = factor_pd(inner, "mse_direct");
  const MatrixXcd core = MatrixXcd::Identity(n, n) - b * llt.solve(d);
  return m * core.trace().real();
}

double mse_woodbury(const PilotSet& pilots, const NetworkRealization& net, int cell,
                    int num_antennas, double noise_var) {
  check_cell(pilots, net, cell);
  const int n = pilots.num_users();
  const MatrixXcd xd = pilots[cell] * net.gains(cell, cell).cwiseSqrt().asDiagonal();
  const auto f = factor_pd(interference_matrix(pilots, net, cell, noise_var), "mse_woodbury");
  MatrixXcd k = MatrixXcd::Identity(n, n) + xd.adjoint() * f.solve(xd);
  k = 0.5 * (k + k.adjoint()).eval();
  const MatrixXcd k_inv = hermitian_pd_inverse(k, "mse_woodbury");
  return num_antennas * k_inv.trace().real();
}

MonteCarloMean empirical_mse(const PilotSet& pilots, const NetworkRealization& net, int cell,
                             int num_antennas, double noise_var, int n_draws, std::uint64_t seed) {
  check_cell(pilots, net, cell);
  if (n_draws < 100) throw ContractError("empirical_mse: need at least 100 draws");
  if (num_antennas < 1) throw ContractError("empirical_mse: need at least one antenna");

  const int C = net.num_cells;
  const int N = net.num_users;
  const int tau = pilots.pilot_length();
  const MatrixXcd w = mmse_filter(pilots, net, cell, noise_var);

  std::vector<MatrixXcd> mixing;  // X_c D_{c,cell}^{1/2}
  mixing.reserve(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c) mixing.push_back(pilots[c] * net.gains(c, cell).cwiseSqrt().asDiagonal());

  Rng rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  MatrixXcd own;
  for (int draw = 0; draw < n_draws; ++draw) {
    MatrixXcd y = complex_normal_matrix(rng, tau, num_antennas, noise_var);
    for (int c = 0; c < C; ++c) {
      MatrixXcd h = complex_normal_matrix(rng, N, num_antennas);
      y.noalias() += mixing[static_cast<std::size_t>(c)] * h;
      if (c == cell) own = std::move(h);
    }
    const double err = (own - w * y).squaredNorm();
    sum += err;
    sum_sq += err * err;
  }
  const double n = n_draws;
  MonteCarloMean out;
  out.mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1.0));
  out.standard_error = std::sqrt(var / n);
  return out;
}

}  // namespace pilotopt
