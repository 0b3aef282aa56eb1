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

#include "pilotopt/conic.hpp"

#include <cmath>
#include <iomanip>
#include <string>

namespace pilotopt {

namespace {

void add_hermitian_variable(HermitianAffine& expr, int var_offset, int n, int at) {
  for (int a = 0; a < n; ++a) {
    expr.terms.push_back({var_offset + hermitian_param_index(n, a, a), {{at + a, at + a, 1.0}}});
  }
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const int re = var_offset + hermitian_param_index(n, a, b);
      expr.terms.push_back({re, {{at + a, at + b, 1.0}, {at + b, at + a, 1.0}}});
      expr.terms.push_back({re + 1, {{at + a, at + b, cplx(0, 1)}, {at + b, at + a, cplx(0, -1)}}});
    }
  }
}

double hermitian_defect(const MatrixXcd& h) { return (h - h.adjoint()).norm(); }

}  // namespace

MatrixXcd HermitianAffine::evaluate(const VectorXd& y) const {
  MatrixXcd out = constant;
  for (const Term& t : terms) {
    const double v = y(t.variable);
    if (v == 0.0) continue;
    for (const HermEntry& e : t.entries) out(e.row, e.col) += v * e.value;
  }
  return out;
}

MatrixXd LmiBlock::evaluate(const VectorXd& y) const {
  MatrixXd out = constant;
  for (const Term& t : terms) {
    const double v = y(t.variable);
    if (v == 0.0) continue;
    for (const SymEntry& e : t.entries) out(e.row, e.col) += v * e.value;
  }
  return out;
}

int hermitian_param_count(int n) { return n * n; }

int hermitian_param_index(int n, int a, int b) {
  if (a == b) return a;
  if (a > b) throw ContractError("hermitian_param_index: use the upper triangle (a < b)");
  const int pair = a * n - a * (a + 1) / 2 + (b - a - 1);
  return n + 2 * pair;
}

MatrixXcd hermitian_from_params(const VectorXd& params, int n) {
  if (params.size() != hermitian_param_count(n)) throw ContractError("hermitian_from_params: size");
  MatrixXcd h(n, n);
  for (int a = 0; a < n; ++a) {
    h(a, a) = params(a);
    for (int b = a + 1; b < n; ++b) {
      const int i = hermitian_param_index(n, a, b);
      h(a, b) = cplx(params(i), params(i + 1));
      h(b, a) = std::conj(h(a, b));
    }
  }
  return h;
}

VectorXd hermitian_to_params(const MatrixXcd& h) {
  const int n = static_cast<int>(h.rows());
  VectorXd p(hermitian_param_count(n));
  for (int a = 0; a < n; ++a) {
    p(a) = h(a, a).real();
    for (int b = a + 1; b < n; ++b) {
      const int i = hermitian_param_index(n, a, b);
      p(i) = h(a, b).real();
      p(i + 1) = h(a, b).imag();
    }
  }
  return p;
}

MatrixXcd SubproblemLayout::pilot(const VectorXd& y) const {
  MatrixXcd x(pilot_length, num_users);
  for (int n = 0; n < num_users; ++n) {
    for (int k = 0; k < pilot_length; ++k) x(k, n) = cplx(y(x_re(k, n)), y(x_im(k, n)));
  }
  return x;
}

MatrixXcd SubproblemLayout::g(const VectorXd& y) const {
  return hermitian_from_params(y.segment(g_offset, hermitian_param_count(num_users)), num_users);
}

MatrixXcd SubproblemLayout::a(const VectorXd& y) const {
  return hermitian_from_params(y.segment(a_offset, hermitian_param_count(num_users)), num_users);
}

double ConicProgram::equality_residual(const VectorXd& y) const {
  if (equality_matrix.rows() == 0) return 0.0;
  return (equality_matrix * y - equality_rhs).cwiseAbs().maxCoeff();
}

double ConicProgram::max_psd_violation(const VectorXd& y) const {
  double worst = 0.0;
  for (const LmiBlock& b : blocks) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(b.evaluate(y), Eigen::EigenvaluesOnly);
    worst = std::max(worst, -eig.eigenvalues().minCoeff());
  }
  return worst;
}

double ConicProgram::max_hermitian_psd_violation(const VectorXd& y) const {
  double worst = 0.0;
  for (const HermitianAffine& b : hermitian_blocks) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(b.evaluate(y), Eigen::EigenvaluesOnly);
    worst = std::max(worst, -eig.eigenvalues().minCoeff());
  }
  return worst;
}

void ConicProgram::write_sparse_text(std::ostream& os) const {
  os << std::setprecision(17);
  os << "pilotopt-conic 1\n";
  os << "variables " << num_variables << "\n";
  os << "blocks " << blocks.size();
  for (const LmiBlock& b : blocks) os << ' ' << b.dim;
  os << "\n";
  for (int i = 0; i < num_variables; ++i) {
    if (objective(i) != 0.0) os << "c " << i << ' ' << objective(i) << "\n";
  }
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const LmiBlock& b = blocks[bi];
    for (int r = 0; r < b.dim; ++r) {
      for (int c = r; c < b.dim; ++c) {
        if (b.constant(r, c) != 0.0) {
          os << "F " << bi << " -1 " << r << ' ' << c << ' ' << b.constant(r, c) << "\n";
        }
      }
    }
    for (const LmiBlock::Term& t : b.terms) {
      for (const SymEntry& e : t.entries) {
        if (e.row <= e.col) {
          os << "F " << bi << ' ' << t.variable << ' ' << e.row << ' ' << e.col << ' ' << e.value
             << "\n";
        }
      }
    }
  }
  os << "equalities " << equality_matrix.rows() << "\n";
  for (Eigen::Index r = 0; r < equality_matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < equality_matrix.cols(); ++c) {
      if (equality_matrix(r, c) != 0.0) os << "E " << r << ' ' << c << ' ' << equality_matrix(r, c) << "\n";
    }
    os << "f " << r << ' ' << equality_rhs(r) << "\n";
  }
}

MatrixXd hermitian_to_real(const MatrixXcd& h) {
  const Eigen::Index n = h.rows();
  MatrixXd out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = h.real();
  out.topRightCorner(n, n) = -h.imag();
  out.bottomLeftCorner(n, n) = h.imag();
  out.bottomRightCorner(n, n) = h.real();
  return out;
}

LmiBlock hermitian_to_real(const HermitianAffine& expr, double tol) {
  const int n = expr.dim;
  if (expr.constant.rows() != n || expr.constant.cols() != n) {
    throw ContractError("hermitian_to_real: constant has wrong shape");
  }
  if (hermitian_defect(expr.constant) > tol * std::max(1.0, expr.constant.norm())) {
    throw ContractError("hermitian_to_real: constant term is not Hermitian");
  }

  LmiBlock out;
  out.dim = 2 * n;
  out.constant = hermitian_to_real(expr.constant);
  out.terms.reserve(expr.terms.size());
  MatrixXcd probe = MatrixXcd::Zero(n, n);
  for (const HermitianAffine::Term& t : expr.terms) {
    probe.setZero();
    for (const HermEntry& e : t.entries) {
      if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n) {
        throw ContractError("hermitian_to_real: entry outside the block");
      }
      probe(e.row, e.col) += e.value;
    }
    if (hermitian_defect(probe) > tol * std::max(1.0, probe.norm())) {
      throw ContractError("hermitian_to_real: coefficient of variable " + std::to_string(t.variable) +
                          " is not Hermitian");
    }
    LmiBlock::Term rt{t.variable, {}};
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const cplx v = probe(r, c);
        if (v.real() != 0.0) {
          rt.entries.push_back({r, c, v.real()});
          rt.entries.push_back({r + n, c + n, v.real()});
        }
        if (v.imag() != 0.0) {
          rt.entries.push_back({r + n, c, v.imag()});
          rt.entries.push_back({r, c + n, -v.imag()});
        }
      }
    }
    out.terms.push_back(std::move(rt));
  }
  return out;
}

ConicProgram build_subproblem(const MatrixXcd& x_prev, const VectorXd& sqrt_gains,
                              const MatrixXcd& f_matrix, double p_max) {
  const int tau = static_cast<int>(x_prev.rows());
  const int n = static_cast<int>(x_prev.cols());
  if (tau < 1 || n < 1) throw ContractError("build_subproblem: empty pilot matrix");
  if (sqrt_gains.size() != n) throw ContractError("build_subproblem: gain vector size");
  if (f_matrix.rows() != tau || f_matrix.cols() != tau) {
    throw ContractError("build_subproblem: F must be tau x tau");
  }
  if (!(p_max > 0.0)) throw ContractError("build_subproblem: power budget must be positive");

  SubproblemLayout layout;
  layout.pilot_length = tau;
  layout.num_users = n;
  layout.x_offset = 0;
  layout.g_offset = 2 * tau * n;
  layout.a_offset = layout.g_offset + hermitian_param_count(n);

  ConicProgram prog;
  prog.num_variables = layout.a_offset + hermitian_param_count(n);
  prog.layout = layout;

  prog.objective = VectorXd::Zero(prog.num_variables);
  for (int a = 0; a < n; ++a) prog.objective(layout.g_offset + a) = 1.0;

  // [[P I_N, X^H], [X, I_tau]]
  HermitianAffine power;
  power.dim = n + tau;
  power.constant = MatrixXcd::Identity(n + tau, n + tau);
  power.constant.topLeftCorner(n, n) *= p_max;
  for (int col = 0; col < n; ++col) {
    for (int k = 0; k < tau; ++k) {
      power.terms.push_back({layout.x_re(k, col), {{n + k, col, 1.0}, {col, n + k, 1.0}}});
      power.terms.push_back(
          {layout.x_im(k, col), {{n + k, col, cplx(0, 1)}, {col, n + k, cplx(0, -1)}}});
    }
  }

  // [[G, I_N], [I_N, I_N + A]]
  HermitianAffine estimation;
  estimation.dim = 2 * n;
  estimation.constant = MatrixXcd::Zero(2 * n, 2 * n);
  estimation.constant.topRightCorner(n, n).setIdentity();
  estimation.constant.bottomLeftCorner(n, n).setIdentity();
  estimation.constant.bottomRightCorner(n, n).setIdentity();
  add_hermitian_variable(estimation, layout.g_offset, n, 0);
  add_hermitian_variable(estimation, layout.a_offset, n, n);

  prog.hermitian_blocks = {std::move(power), std::move(estimation)};
  for (const HermitianAffine& h : prog.hermitian_blocks) prog.blocks.push_back(hermitian_to_real(h));

  // 2A - (K(X) + K(X)^H) = 0 with K(X) = D^{1/2} X^H Q D^{1/2}, Q = F^-1 X_prev.
  // K is linear in the real parts of X, so each column of the map is K at a unit pilot.
  Eigen::LLT<MatrixXcd> f_llt(f_matrix);
  if (f_llt.info() != Eigen::Success) {
    throw NumericalError("build_subproblem: F is not positive definite");
  }
  const MatrixXcd q = f_llt.solve(x_prev);
  const int params = hermitian_param_count(n);
  prog.equality_matrix = MatrixXd::Zero(params, prog.num_variables);
  prog.equality_rhs = VectorXd::Zero(params);
  prog.equality_matrix.middleCols(layout.a_offset, params) = 2.0 * MatrixXd::Identity(params, params);
  MatrixXcd unit = MatrixXcd::Zero(tau, n);
  for (int col = 0; col < n; ++col) {
    for (int k = 0; k < tau; ++k) {
      for (int part = 0; part < 2; ++part) {
        unit.setZero();
        unit(k, col) = part == 0 ? cplx(1, 0) : cplx(0, 1);
        const MatrixXcd kx = sqrt_gains.asDiagonal() * unit.adjoint() * q * sqrt_gains.asDiagonal();
        const int var = part == 0 ? layout.x_re(k, col) : layout.x_im(k, col);
        prog.equality_matrix.col(var) = -hermitian_to_params(kx + kx.adjoint());
      }
    }
  }
  return prog;
}

ConicProgram build_subproblem(int cell, const PilotSet& previous, const NetworkRealization& net,
                              double p_max, double noise_var) {
  if (!(noise_var > 0.0)) throw ContractError("build_subproblem: noise variance must be positive");
  if (cell < 0 || cell >= net.num_cells) throw ContractError("build_subproblem: cell out of range");
  const MatrixXcd f = interference_matrix(previous, net, cell, noise_var);
  return build_subproblem(previous[cell], net.gains(cell, cell).cwiseSqrt(), f, p_max);
}

double complexity_estimate(int num_users, int pilot_length, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ContractError("complexity_estimate: eps must be in (0, 1)");
  if (num_users < 1 || pilot_length < 1) throw ContractError("complexity_estimate: sizes must be >= 1");
  const double n = num_users;
  const double tau = pilot_length;
  const double m = (2.0 * n + tau) * n;
  const double alpha = 10.0 * n * n * n + (3.0 * tau + 6.0 * m) * n * n +
                       n * m * tau * (m * tau + 2.0) + tau * tau * (m + tau) + m * m;
  return std::log(1.0 / eps) * std::sqrt(4.0 * n + tau) * alpha * m;
}

}  // namespace pilotopt
