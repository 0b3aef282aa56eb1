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

#include <optional>
#include <ostream>
#include <vector>

#include "pilotopt/common.hpp"
#include "pilotopt/estimation.hpp"
#include "pilotopt/network.hpp"

namespace pilotopt {

struct SymEntry {
  int row;
  int col;
  double value;
};

struct HermEntry {
  int row;
  int col;
  cplx value;
};

/// constant + sum_v y_v * coeff_v over real decision variables y, with
/// Hermitian coefficients stored sparsely (both triangles).
struct HermitianAffine {
  struct Term {
    int variable;
    std::vector<HermEntry> entries;
  };
  int dim = 0;
  MatrixXcd constant;
  std::vector<Term> terms;

  MatrixXcd evaluate(const VectorXd& y) const;
};

/// Real symmetric affine matrix expression; the solver's LMI block.
struct LmiBlock {
  struct Term {
    int variable;
    std::vector<SymEntry> entries;
  };
  int dim = 0;
  MatrixXd constant;
  std::vector<Term> terms;

  MatrixXd evaluate(const VectorXd& y) const;
};

/// Where X (tau x N complex), G and A (N x N Hermitian) live in the real
/// decision vector. Hermitian matrices use N^2 reals: the diagonal first,
/// then (re, im) of each upper entry in row-major order.
struct SubproblemLayout {
  int pilot_length = 0;
  int num_users = 0;
  int x_offset = 0;
  int g_offset = 0;
  int a_offset = 0;

  int x_re(int row, int col) const { return x_offset + 2 * (col * pilot_length + row); }
  int x_im(int row, int col) const { return x_re(row, col) + 1; }

  MatrixXcd pilot(const VectorXd& y) const;
  MatrixXcd g(const VectorXd& y) const;
  MatrixXcd a(const VectorXd& y) const;
};

/// Index of the real parameter that holds the diagonal entry (a, a), or the
/// real part of upper entry (a, b); the imaginary part follows it.
int hermitian_param_index(int n, int a, int b);
int hermitian_param_count(int n);
MatrixXcd hermitian_from_params(const VectorXd& params, int n);
VectorXd hermitian_to_params(const MatrixXcd& h);

/// minimize objective . y  s.t.  every block(y) is PSD,  equality_matrix * y = equality_rhs.
struct ConicProgram {
  int num_variables = 0;
  VectorXd objective;
  std::vector<HermitianAffine> hermitian_blocks;
  std::vector<LmiBlock> blocks;
  MatrixXd equality_matrix;
  VectorXd equality_rhs;
  std::optional<SubproblemLayout> layout;

  /// Hermitian (complex) block values, real blocks and equality rows at y.
  double equality_residual(const VectorXd& y) const;
  double max_psd_violation(const VectorXd& y) const;
  double max_hermitian_psd_violation(const VectorXd& y) const;

  /// Sparse text dump for cross-checking with external solvers (format in README).
  void write_sparse_text(std::ostream& os) const;
};

/// H -> [[Re H, -Im H], [Im H, Re H]].
MatrixXd hermitian_to_real(const MatrixXcd& h);

/// Embeds every term of an affine Hermitian expression. Throws ContractError
/// if the constant or any coefficient is not Hermitian within tol.
LmiBlock hermitian_to_real(const HermitianAffine& expr, double tol = 1e-12);

/// The per-cell convex subproblem built around the previous iterate:
///
///   minimize Tr(G)
///   s.t. [[P_max I_N, X^H], [X, I_tau]] >= 0
///        [[G, I_N], [I_N, I_N + A]]     >= 0
///        2A = D^{1/2} X^H F^-1 X_prev D^{1/2} + D^{1/2} X_prev^H F^-1 X D^{1/2}
///
/// with F built from the other cells' previous pilots.
ConicProgram build_subproblem(int cell, const PilotSet& previous, const NetworkRealization& net,
                              double p_max, double noise_var);

/// Same as build_subproblem but with the pieces given explicitly:
/// sqrt_gains = diag(D^{1/2}), f_matrix = F, x_prev = X_prev.
ConicProgram build_subproblem(const MatrixXcd& x_prev, const VectorXd& sqrt_gains,
                              const MatrixXcd& f_matrix, double p_max);

/// Worst-case interior-point arithmetic estimate for one subproblem solve:
/// ln(1/eps) * sqrt(4N + tau) * alpha * m with m = (2N + tau) N.
double complexity_estimate(int num_users, int pilot_length, double eps);

}  // namespace pilotopt
