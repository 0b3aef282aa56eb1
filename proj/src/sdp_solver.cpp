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

// Problem pair solved here, with F(y) = F0 + sum_i y_i F_i block diagonal:
//
//   (P)  min  c'y            s.t.  S = F(y) >= 0,  E y = f
//   (D)  max -<F0, Z> + f'l  s.t.  <F_i, Z> + (E'l)_i = c_i,  Z >= 0
//
// Newton steps use the HKM linearization of Z S = mu I:
//   dZ = sym(mu S^-1 - Z - Z dS S^-1 - corr),  dS = sum_i dy_i F_i + R_p
// which gives the Schur system M dy - E'dl = h, E dy = r_e with
//   M_ij = Tr(F_i Z F_j S^-1).

#include "pilotopt/sdp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace pilotopt {

std::string_view to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::kOptimal: return "optimal";
    case SolverStatus::kInfeasible: return "infeasible";
    case SolverStatus::kNumericalFailure: return "numerical-failure";
    case SolverStatus::kIterationLimit: return "iteration-limit";
  }
  return "unknown";
}

namespace {

using BlockMats = std::vector<MatrixXd>;

struct VarBlockTerm {
  int variable;
  std::vector<SymEntry> entries;
};

// Variables grouped per block, with duplicate terms merged.
struct BlockStructure {
  int dim = 0;
  MatrixXd constant;
  std::vector<VarBlockTerm> vars;
};

// Equilibrated copy of a ConicProgram: every block is congruence-scaled by a
// positive diagonal W (PSD-ness is unchanged), variables are rescaled so each
// coefficient has unit norm, and equality rows are normalized.
// The original variables are recovered as y = var_scale .* y_scaled.
struct ScaledProgram {
  std::vector<BlockStructure> blocks;
  VectorXd objective;
  MatrixXd equality_matrix;
  VectorXd equality_rhs;
  VectorXd var_scale;
};

ScaledProgram equilibrate(const ConicProgram& prog) {
  ScaledProgram out;
  const int m = prog.num_variables;
  out.blocks.reserve(prog.blocks.size());
  for (const LmiBlock& b : prog.blocks) {
    if (b.constant.rows() != b.dim || b.constant.cols() != b.dim) {
      throw ContractError("solve: block constant has wrong shape");
    }
    VectorXd diag_mag = b.constant.diagonal().cwiseAbs();
    std::map<int, std::vector<SymEntry>> merged;
    for (const LmiBlock::Term& t : b.terms) {
      if (t.variable < 0 || t.variable >= m) {
        throw ContractError("solve: block term refers to an unknown variable");
      }
      auto& dst = merged[t.variable];
      dst.insert(dst.end(), t.entries.begin(), t.entries.end());
      for (const SymEntry& e : t.entries) {
        if (e.row < 0 || e.row >= b.dim || e.col < 0 || e.col >= b.dim) {
          throw ContractError("solve: block entry outside the block");
        }
        if (e.row == e.col) diag_mag(e.row) = std::max(diag_mag(e.row), std::fabs(e.value));
      }
    }
    VectorXd w(b.dim);
    for (int r = 0; r < b.dim; ++r) w(r) = diag_mag(r) > 0.0 ? 1.0 / std::sqrt(diag_mag(r)) : 1.0;

    BlockStructure s;
    s.dim = b.dim;
    s.constant = w.asDiagonal() * b.constant * w.asDiagonal();
    for (auto& [var, entries] : merged) {
      for (SymEntry& e : entries) e.value *= w(e.row) * w(e.col);
      s.vars.push_back({var, std::move(entries)});
    }
    out.blocks.push_back(std::move(s));
  }

  VectorXd sq = VectorXd::Zero(m);
  for (const BlockStructure& b : out.blocks) {
    for (const VarBlockTerm& t : b.vars) {
      for (const SymEntry& e : t.entries) sq(t.variable) += e.value * e.value;
    }
  }
  out.var_scale = VectorXd::Ones(m);
  for (int i = 0; i < m; ++i) {
    if (sq(i) > 0.0) out.var_scale(i) = 1.0 / std::sqrt(sq(i));
  }
  for (BlockStructure& b : out.blocks) {
    for (VarBlockTerm& t : b.vars) {
      for (SymEntry& e : t.entries) e.value *= out.var_scale(t.variable);
    }
  }
  out.objective = prog.objective.cwiseProduct(out.var_scale);

  const auto p = prog.equality_matrix.rows();
  if (p > 0) {
    out.equality_matrix = prog.equality_matrix * out.var_scale.asDiagonal();
    out.equality_rhs = prog.equality_rhs;
    for (Eigen::Index k = 0; k < p; ++k) {
      const double nrm = out.equality_matrix.row(k).norm();
      if (nrm > 0.0) {
        out.equality_matrix.row(k) /= nrm;
        out.equality_rhs(k) /= nrm;
      }
    }
  } else {
    out.equality_matrix = MatrixXd::Zero(0, m);
    out.equality_rhs = VectorXd::Zero(0);
  }
  return out;
}

double frob_dot(const MatrixXd& a, const MatrixXd& b) { return a.cwiseProduct(b).sum(); }

MatrixXd sym(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

// Largest step t with X + t dX >= 0 (infinity if dX does not shrink the cone).
double max_step(const Eigen::LLT<MatrixXd>& x_llt, const MatrixXd& dx) {
  MatrixXd w = x_llt.matrixL().solve(dx);
  w = x_llt.matrixL().solve(w.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym(w), Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

std::vector<std::vector<int>> variable_components(const std::vector<BlockStructure>& blocks, int m) {
  std::vector<int> parent(static_cast<std::size_t>(m));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const BlockStructure& b : blocks) {
    if (b.vars.empty()) continue;
    const int root = find(b.vars.front().variable);
    for (const VarBlockTerm& t : b.vars) parent[find(t.variable)] = root;
  }
  std::map<int, std::vector<int>> groups;
  for (int v = 0; v < m; ++v) groups[find(v)].push_back(v);
  std::vector<std::vector<int>> out;
  for (auto& [root, vars] : groups) out.push_back(std::move(vars));
  return out;
}

class InteriorPoint {
 public:
  InteriorPoint(const ConicProgram& prog, const SolverSettings& settings)
      : prog_(prog), settings_(settings), scaled_(equilibrate(prog)), blocks_(scaled_.blocks) {
    m_ = prog.num_variables;
    p_ = static_cast<int>(prog.equality_matrix.rows());
    if (prog.objective.size() != m_) throw ContractError("solve: objective has wrong size");
    if (p_ > 0 && (prog.equality_matrix.cols() != m_ || prog.equality_rhs.size() != p_)) {
      throw ContractError("solve: equality constraints have wrong shape");
    }
    for (auto& vars : variable_components(blocks_, m_)) components_.push_back({std::move(vars), {}});
  }

  SolverReport run();

 private:
  MatrixXd eval_block(std::size_t b, const VectorXd& y) const {
    MatrixXd out = blocks_[b].constant;
    for (const VarBlockTerm& t : blocks_[b].vars) {
      const double v = y(t.variable);
      for (const SymEntry& e : t.entries) out(e.row, e.col) += v * e.value;
    }
    return out;
  }

  MatrixXd eval_linear(std::size_t b, const VectorXd& dy) const {
    MatrixXd out = MatrixXd::Zero(blocks_[b].dim, blocks_[b].dim);
    for (const VarBlockTerm& t : blocks_[b].vars) {
      const double v = dy(t.variable);
      for (const SymEntry& e : t.entries) out(e.row, e.col) += v * e.value;
    }
    return out;
  }

  // (A*(W))_i = sum_b <F_i,b, W_b>
  VectorXd adjoint(const BlockMats& w) const {
    VectorXd out = VectorXd::Zero(m_);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      for (const VarBlockTerm& t : blocks_[b].vars) {
        double acc = 0.0;
        for (const SymEntry& e : t.entries) acc += e.value * w[b](e.row, e.col);
        out(t.variable) += acc;
      }
    }
    return out;
  }

  MatrixXd schur(const BlockMats& z, const BlockMats& s_inv) const {
    MatrixXd m = MatrixXd::Zero(m_, m_);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto& vars = blocks_[b].vars;
      const MatrixXd& zb = z[b];
      const MatrixXd& sb = s_inv[b];
      for (std::size_t ii = 0; ii < vars.size(); ++ii) {
        const auto& ei = vars[ii].entries;
        for (std::size_t jj = ii; jj < vars.size(); ++jj) {
          const auto& ej = vars[jj].entries;
          double acc = 0.0;
          for (const SymEntry& a : ei) {
            for (const SymEntry& c : ej) acc += a.value * c.value * zb(a.col, c.row) * sb(c.col, a.row);
          }
          m(vars[ii].variable, vars[jj].variable) += acc;
          if (ii != jj) m(vars[jj].variable, vars[ii].variable) += acc;
        }
      }
    }
    return m;
  }

  struct Direction {
    VectorXd dy;
    VectorXd dl;
    BlockMats ds;
    BlockMats dz;
  };

  bool factor_newton(const BlockMats& z, const BlockMats& s_inv);
  VectorXd solve_m(const VectorXd& h) const {
    VectorXd out(m_);
    for (const Component& comp : components_) {
      const VectorXd part = h(comp.vars);
      const VectorXd sol = comp.llt.solve(part);
      out(comp.vars) = sol;
    }
    return out;
  }
  // [M, -E^T; E, 0] [dy; dl] = [h; re]
  void solve_schur(const VectorXd& h, const VectorXd& re, VectorXd& dy, VectorXd& dl) const {
    if (p_ > 0) {
      dl = k_fact_.solve(re - scaled_.equality_matrix * solve_m(h));
      dy = solve_m(h + scaled_.equality_matrix.transpose() * dl);
    } else {
      dl = VectorXd::Zero(0);
      dy = solve_m(h);
    }
  }
  Direction direction(double mu_target, const BlockMats* corr) const;

  const ConicProgram& prog_;
  SolverSettings settings_;
  ScaledProgram scaled_;
  const std::vector<BlockStructure>& blocks_;
  int m_ = 0;
  int p_ = 0;

  // iterate
  VectorXd y_;
  VectorXd l_;
  BlockMats s_;
  BlockMats z_;

  // per-iteration state
  BlockMats s_inv_;
  BlockMats rp_;
  VectorXd rd_;
  VectorXd re_;
  MatrixXd m_mat_;
  // Variables that never share a block give a block-diagonal M (after
  // permutation); each diagonal block is factored on its own.
  struct Component {
    std::vector<int> vars;
    Eigen::LLT<MatrixXd> llt;
  };
  std::vector<Component> components_;
  Eigen::LDLT<MatrixXd> k_fact_;
};

bool InteriorPoint::factor_newton(const BlockMats& z, const BlockMats& s_inv) {
  m_mat_ = schur(z, s_inv);
  MatrixXd k = MatrixXd::Zero(p_, p_);
  for (Component& comp : components_) {
    comp.llt.compute(m_mat_(comp.vars, comp.vars));
    if (comp.llt.info() != Eigen::Success) return false;
    if (p_ > 0) {
      const MatrixXd w =
          comp.llt.matrixL().solve(scaled_.equality_matrix(Eigen::all, comp.vars).transpose());
      k.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose());
    }
  }
  if (p_ > 0) {
    k_fact_.compute(k.selfadjointView<Eigen::Lower>());
    if (k_fact_.info() != Eigen::Success) return false;
  }
  return true;
}


InteriorPoint::Direction InteriorPoint::direction(double mu_target, const BlockMats* corr) const {
  const std::size_t nb = blocks_.size();
  BlockMats t(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    t[b] = mu_target * s_inv_[b] - z_[b] - z_[b] * rp_[b] * s_inv_[b];
    if (corr) t[b] -= (*corr)[b];
  }
  const VectorXd h = adjoint(t) - rd_;

  Direction d;
  solve_schur(h, re_, d.dy, d.dl);
  d.ds.resize(nb);
  d.dz.resize(nb);
  auto complete = [&]() {
    for (std::size_t b = 0; b < nb; ++b) {
      d.ds[b] = eval_linear(b, d.dy) + rp_[b];
      d.dz[b] = sym(t[b] - z_[b] * d.ds[b] * s_inv_[b]);
    }
  };
  complete();
  // Refine against the dual equation itself rather than the assembled M,
  // whose round-off grows with ||S^{-1}|| near the optimum.
  for (int pass = 0; pass < 2; ++pass) {
    VectorXd e = adjoint(d.dz) - rd_;
    if (p_ > 0) e += scaled_.equality_matrix.transpose() * d.dl;
    VectorXd cy;
    VectorXd cl;
    solve_schur(e, VectorXd::Zero(p_), cy, cl);
    d.dy += cy;
    if (p_ > 0) d.dl += cl;
    complete();
  }
  return d;
}

SolverReport InteriorPoint::run() {
  const std::size_t nb = blocks_.size();
  const VectorXd& c = scaled_.objective;
  const VectorXd& f = scaled_.equality_rhs;

  // Starting point: scaled identities, sized from the data norms.
  std::vector<double> coeff_norm(nb, 0.0);
  std::vector<double> var_norm(static_cast<std::size_t>(m_), 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    for (const VarBlockTerm& t : blocks_[b].vars) {
      double sq = 0.0;
      for (const SymEntry& e : t.entries) sq += e.value * e.value;
      coeff_norm[b] = std::max(coeff_norm[b], std::sqrt(sq));
      var_norm[static_cast<std::size_t>(t.variable)] += sq;
    }
  }
  double cost_ratio = 0.0;
  for (int i = 0; i < m_; ++i) {
    cost_ratio = std::max(cost_ratio, (1.0 + std::fabs(c(i))) /
                                          (1.0 + std::sqrt(var_norm[static_cast<std::size_t>(i)])));
  }
  y_ = VectorXd::Zero(m_);
  l_ = VectorXd::Zero(p_);
  s_.resize(nb);
  z_.resize(nb);
  std::vector<double> f0_norm(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const double n = blocks_[b].dim;
    f0_norm[b] = blocks_[b].constant.norm();
    const double xi = std::max({10.0, std::sqrt(n), std::sqrt(n) * cost_ratio});
    const double eta = std::max({10.0, std::sqrt(n), f0_norm[b], coeff_norm[b]});
    z_[b] = xi * MatrixXd::Identity(blocks_[b].dim, blocks_[b].dim);
    s_[b] = eta * MatrixXd::Identity(blocks_[b].dim, blocks_[b].dim);
  }
  double total_dim = 0.0;
  for (const auto& b : blocks_) total_dim += b.dim;

  SolverReport report;
  report.status = SolverStatus::kIterationLimit;
  s_inv_.resize(nb);
  rp_.resize(nb);

  std::vector<Eigen::LLT<MatrixXd>> s_llt(nb);
  std::vector<Eigen::LLT<MatrixXd>> z_llt(nb);

  // Near the optimum the Schur system loses accuracy and the dual residual can
  // drift upward; the best iterate seen is what gets reported.
  VectorXd best_y = y_;
  double best_merit = std::numeric_limits<double>::infinity();
  SolverReport best;
  int since_best = 0;
  bool stalled = false;
  int polish_left = settings_.polish_iterations;
  double mu_ref = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter <= settings_.max_iterations; ++iter) {
    report.iterations = iter;
    // residuals and measures
    double gap = 0.0;
    double dobj = 0.0;
    double pinf = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      rp_[b] = eval_block(b, y_) - s_[b];
      gap += frob_dot(s_[b], z_[b]);
      dobj -= frob_dot(blocks_[b].constant, z_[b]);
      pinf = std::max(pinf, rp_[b].norm() / (1.0 + f0_norm[b]));
    }
    rd_ = c - adjoint(z_);
    if (p_ > 0) {
      rd_ -= scaled_.equality_matrix.transpose() * l_;
      re_ = f - scaled_.equality_matrix * y_;
      dobj += f.dot(l_);
      pinf = std::max(pinf, re_.norm() / (1.0 + f.norm()));
    }
    const double pobj = c.dot(y_);
    const double dinf = rd_.norm() / (1.0 + c.norm());
    const double rel_gap = gap / (1.0 + std::fabs(pobj) + std::fabs(dobj));
    report.duality_gap = gap;
    report.relative_gap = rel_gap;
    report.primal_infeasibility = pinf;
    report.dual_infeasibility = dinf;

    const double merit = std::max({rel_gap / settings_.gap_tolerance,
                                   pinf / settings_.feasibility_tolerance,
                                   dinf / settings_.dual_feasibility_tolerance});
    const double mu_now = gap / total_dim;
    // far from tolerance, a shrinking mu still counts as progress
    const bool progressed = best_merit > 1e3 && mu_now < 0.99 * mu_ref;
    if (progressed) mu_ref = mu_now;
    if (merit < best_merit) {
      best_merit = merit;
      best_y = y_;
      best = report;
      since_best = 0;
    } else if (progressed) {
      since_best = 0;
    } else if (++since_best >= 4) {
      stalled = true;
      break;
    }
    if (best_merit <= 1.0) {
      // tolerances met: a few more steps tighten the slack of nearly inactive blocks
      if (since_best > 0 || polish_left-- <= 0 || merit <= 1e-2) break;
    }
    if (iter == settings_.max_iterations) break;

    const double mu = gap / total_dim;
    bool factored = true;
    for (std::size_t b = 0; b < nb && factored; ++b) {
      s_llt[b].compute(s_[b]);
      z_llt[b].compute(z_[b]);
      factored = s_llt[b].info() == Eigen::Success && z_llt[b].info() == Eigen::Success;
      if (factored) s_inv_[b] = s_llt[b].solve(MatrixXd::Identity(blocks_[b].dim, blocks_[b].dim));
    }
    if (!factored || !factor_newton(z_, s_inv_)) {
      report.status = SolverStatus::kNumericalFailure;
      break;
    }

    auto step_lengths = [&](const Direction& d) {
      double ap = std::numeric_limits<double>::infinity();
      double ad = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < nb; ++b) {
        ap = std::min(ap, max_step(s_llt[b], d.ds[b]));
        ad = std::min(ad, max_step(z_llt[b], d.dz[b]));
      }
      return std::pair<double, double>{ap, ad};
    };

    // predictor
    const Direction pred = direction(0.0, nullptr);
    auto [ap_max, ad_max] = step_lengths(pred);
    const double ap = std::min(1.0, ap_max);
    const double ad = std::min(1.0, ad_max);
    double mu_aff = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      mu_aff += frob_dot(s_[b] + ap * pred.ds[b], z_[b] + ad * pred.dz[b]);
    }
    mu_aff /= total_dim;
    const double expon = std::max(1.0, 3.0 * std::min(ap, ad) * std::min(ap, ad));
    double sigma = std::min(1.0, std::pow(std::max(0.0, mu_aff / mu), expon));
    // gap already small enough: spend the step on feasibility
    const double infeasibility = std::max(pinf / settings_.feasibility_tolerance,
                                          dinf / settings_.dual_feasibility_tolerance);
    if (rel_gap <= 0.1 * settings_.gap_tolerance && infeasibility > 1.0) sigma = 1.0;

    // corrector
    BlockMats corr(nb);
    for (std::size_t b = 0; b < nb; ++b) corr[b] = pred.dz[b] * pred.ds[b] * s_inv_[b];
    const Direction d = direction(sigma * mu, &corr);
    auto [cp_max, cd_max] = step_lengths(d);
    const double gamma = 0.9 + 0.09 * std::min(ap, ad);
    const double step_p = std::min(1.0, gamma * cp_max);
    const double step_d = std::min(1.0, gamma * cd_max);
    if (step_p < 1e-12 && step_d < 1e-12) {
      report.status = SolverStatus::kNumericalFailure;
      break;
    }

    y_ += step_p * d.dy;
    if (p_ > 0) l_ += step_d * d.dl;
    for (std::size_t b = 0; b < nb; ++b) {
      s_[b] = sym(s_[b] + step_p * d.ds[b]);
      z_[b] = sym(z_[b] + step_d * d.dz[b]);
    }
  }

  const int iterations = report.iterations;
  const SolverStatus last_status = report.status;
  report = best;
  report.iterations = iterations;
  if (best_merit <= 1.0) {
    report.status = SolverStatus::kOptimal;
  } else if (stalled) {
    report.status = SolverStatus::kNumericalFailure;
  } else {
    report.status = last_status;
  }
  const VectorXd y = best_y.cwiseProduct(scaled_.var_scale);
  report.solution = y;
  report.objective = prog_.objective.dot(y);
  report.max_psd_violation = prog_.max_psd_violation(y);
  report.equality_residual = prog_.equality_residual(y);
  if (prog_.layout) {
    report.pilot = prog_.layout->pilot(y);
    report.g = prog_.layout->g(y);
    report.a = prog_.layout->a(y);
  }
  return report;
}

}  // namespace

SolverReport solve(const ConicProgram& program, const SolverSettings& settings) {
  InteriorPoint ipm(program, settings);
  return ipm.run();
}

}  // namespace pilotopt
