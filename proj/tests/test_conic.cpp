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

#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "pilotopt/conic.hpp"
#include "pilotopt/estimation.hpp"
#include "support.hpp"

using namespace pilotopt;

namespace {

VectorXd point(const SubproblemLayout& l, const MatrixXcd& x, const MatrixXcd& g, const MatrixXcd& a) {
  VectorXd y = VectorXd::Zero(l.a_offset + hermitian_param_count(l.num_users));
  for (int n = 0; n < l.num_users; ++n) {
    for (int k = 0; k < l.pilot_length; ++k) {
      y(l.x_re(k, n)) = x(k, n).real();
      y(l.x_im(k, n)) = x(k, n).imag();
    }
  }
  y.segment(l.g_offset, hermitian_param_count(l.num_users)) = hermitian_to_params(g);
  y.segment(l.a_offset, hermitian_param_count(l.num_users)) = hermitian_to_params(a);
  return y;
}

MatrixXcd random_hermitian(Rng& rng, int n) {
  const MatrixXcd z = complex_normal_matrix(rng, n, n);
  return 0.5 * (z + z.adjoint());
}

double min_eig(const MatrixXcd& h) { return h.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff(); }
double min_eig(const MatrixXd& h) { return h.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff(); }

}  // namespace

TEST_SUITE("conic") {

TEST_CASE("Hermitian parameterization round-trips") {
  Rng rng(1);
  for (int n = 1; n <= 6; ++n) {
    const MatrixXcd h = random_hermitian(rng, n);
    CHECK(hermitian_param_count(n) == n * n);
    CHECK(hermitian_from_params(hermitian_to_params(h), n).isApprox(h, 1e-15));
  }
}

TEST_CASE("complex to real embedding") {
  SUBCASE("1x1 real scalar") {
    MatrixXcd h(1, 1);
    h(0, 0) = 2.5;
    CHECK(hermitian_to_real(h) == 2.5 * MatrixXd::Identity(2, 2));
  }
  SUBCASE("[[0, i], [-i, 0]] has eigenvalues {1, 1, -1, -1}") {
    MatrixXcd h(2, 2);
    h << 0.0, cplx(0, 1), cplx(0, -1), 0.0;
    const MatrixXd r = hermitian_to_real(h);
    REQUIRE(r.rows() == 4);
    VectorXd ev = r.selfadjointView<Eigen::Lower>().eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size());
    CHECK(ev(0) == doctest::Approx(-1.0));
    CHECK(ev(1) == doctest::Approx(-1.0));
    CHECK(ev(2) == doctest::Approx(1.0));
    CHECK(ev(3) == doctest::Approx(1.0));
  }
  SUBCASE("PSD matrices stay PSD") {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
      const MatrixXcd z = complex_normal_matrix(rng, 5, 3);
      CHECK(min_eig(hermitian_to_real(MatrixXcd(z * z.adjoint()))) >= -1e-12);
    }
  }
  SUBCASE("spectrum is doubled") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      const MatrixXcd h = random_hermitian(rng, 1 + trial % 7);
      VectorXd ec = h.selfadjointView<Eigen::Lower>().eigenvalues();
      VectorXd er = hermitian_to_real(h).selfadjointView<Eigen::Lower>().eigenvalues();
      for (Eigen::Index i = 0; i < ec.size(); ++i) {
        CHECK(std::abs(er(2 * i) - ec(i)) <= 1e-10);
        CHECK(std::abs(er(2 * i + 1) - ec(i)) <= 1e-10);
      }
    }
  }
  SUBCASE("non-Hermitian expressions are rejected") {
    HermitianAffine e;
    e.dim = 2;
    e.constant = MatrixXcd::Zero(2, 2);
    e.terms.push_back({0, {{0, 1, cplx(1, 0)}}});
    CHECK_THROWS_AS(hermitian_to_real(e), ContractError);
    e.terms.clear();
    e.constant(0, 1) = cplx(0, 1);
    e.constant(1, 0) = cplx(0, 1);
    CHECK_THROWS_AS(hermitian_to_real(e), ContractError);
  }
}

TEST_CASE("subproblem structure") {
  Rng rng(4);
  SUBCASE("smallest instance") {
    const auto net = testing::uniform_gain_network(1, 1, 1.0);
    PilotSet prev = PilotSet::zeros(1, 1, 1);
    prev[0](0, 0) = 1.0;
    const ConicProgram p = build_subproblem(0, prev, net, 1.0, 1.0);
    REQUIRE(p.hermitian_blocks.size() == 2);
    CHECK(p.hermitian_blocks[0].dim == 2);
    CHECK(p.hermitian_blocks[1].dim == 2);
    CHECK(p.blocks[0].dim == 4);
    CHECK(p.blocks[1].dim == 4);
    // complex x (2 reals), Hermitian G and A (1 real each)
    CHECK(p.num_variables == 4);
  }
  SUBCASE("block sizes and embedding consistency") {
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 1 + trial % 4, tau = 1 + trial % 5;
      const auto net = testing::random_gain_network(2, n, rng);
      const auto prev = testing::random_feasible_pilots(2, tau, n, 2.0, rng);
      const ConicProgram p = build_subproblem(trial % 2, prev, net, 2.0, 0.1);
      CHECK(p.hermitian_blocks[0].dim == n + tau);
      CHECK(p.hermitian_blocks[1].dim == 2 * n);
      CHECK(p.num_variables == 2 * tau * n + 2 * n * n);
      CHECK(p.equality_matrix.rows() == n * n);
      const VectorXd y = VectorXd::Random(p.num_variables);
      for (std::size_t b = 0; b < 2; ++b) {
        const MatrixXcd h = p.hermitian_blocks[b].evaluate(y);
        CHECK((h - h.adjoint()).norm() == 0.0);
        CHECK(hermitian_to_real(h).isApprox(p.blocks[b].evaluate(y), 1e-14));
      }
    }
  }
  SUBCASE("zero pilot, zero A and identity G is feasible") {
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 1 + trial % 5, tau = 1 + trial % 6;
      const auto net = testing::random_gain_network(3, n, rng);
      const auto prev = testing::random_feasible_pilots(3, tau, n, 1.0, rng);
      const ConicProgram p = build_subproblem(0, prev, net, 1.0, 0.1);
      const VectorXd y = point(*p.layout, MatrixXcd::Zero(tau, n), MatrixXcd::Identity(n, n),
                               MatrixXcd::Zero(n, n));
      CHECK(p.max_psd_violation(y) <= 1e-14);
      CHECK(p.equality_residual(y) == 0.0);
    }
  }
  SUBCASE("power block is PSD exactly when lambda_max(X^H X) <= P") {
    const int n = 3, tau = 4;
    const double p_max = 2.0;
    const auto net = testing::random_gain_network(1, n, rng);
    const auto prev = testing::random_feasible_pilots(1, tau, n, p_max, rng);
    const ConicProgram prog = build_subproblem(0, prev, net, p_max, 0.1);
    std::uniform_real_distribution<double> ratio(0.5, 1.5);
    for (int trial = 0; trial < 100; ++trial) {
      MatrixXcd x = complex_normal_matrix(rng, tau, n);
      const double lam0 = (x.adjoint() * x).selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();
      double r = ratio(rng);
      if (std::abs(r - 1.0) < 1e-3) r = 1.01;
      x *= std::sqrt(r * p_max / lam0);
      const double lam = (x.adjoint() * x).selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();
      const VectorXd y = point(*prog.layout, x, MatrixXcd::Identity(n, n), MatrixXcd::Zero(n, n));
      const bool lmi = min_eig(prog.blocks[0].evaluate(y)) >= -1e-9 * p_max;
      CHECK(lmi == (lam <= p_max));
    }
  }
  SUBCASE("at the previous pilots the equality gives the Hermitian part") {
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 1 + trial % 4, tau = 1 + trial % 6, cells = 1 + trial % 3;
      const double s2 = 0.3;
      const auto net = testing::random_gain_network(cells, n, rng);
      const auto prev = testing::random_feasible_pilots(cells, tau, n, 3.0, rng);
      const int cell = trial % cells;
      const ConicProgram p = build_subproblem(cell, prev, net, 3.0, s2);
      const MatrixXcd f = interference_matrix(prev, net, cell, s2);
      const VectorXd s = net.gains(cell, cell).cwiseSqrt();
      const MatrixXcd k = s.asDiagonal() * prev[cell].adjoint() * f.inverse() * prev[cell] * s.asDiagonal();
      const MatrixXcd herm = 0.5 * (k + k.adjoint());
      const MatrixXcd g = (MatrixXcd::Identity(n, n) + herm).inverse();
      const VectorXd y = point(*p.layout, prev[cell], g, herm);
      CHECK(p.equality_residual(y) <= 1e-10 * (1.0 + herm.norm()));
      const MatrixXcd block = p.hermitian_blocks[1].evaluate(y);
      CHECK(block.bottomRightCorner(n, n).isApprox(MatrixXcd::Identity(n, n) + herm, 1e-14));
      // Tr(G) at that point is f / M
      CHECK(g.trace().real() ==
            doctest::Approx(mse_woodbury(prev, net, cell, 1, s2)).epsilon(1e-10));
    }
  }
  SUBCASE("preconditions") {
    const auto net = testing::uniform_gain_network(1, 1, 1.0);
    const auto prev = PilotSet::zeros(1, 1, 1);
    CHECK_THROWS_AS(build_subproblem(0, prev, net, 1.0, 0.0), ContractError);
    CHECK_THROWS_AS(build_subproblem(0, prev, net, 0.0, 1.0), ContractError);
    CHECK_THROWS_AS(build_subproblem(1, prev, net, 1.0, 1.0), ContractError);
  }
}

TEST_CASE("sparse text dump rebuilds the program") {
  Rng rng(5);
  const auto net = testing::random_gain_network(2, 2, rng);
  const auto prev = testing::random_feasible_pilots(2, 3, 2, 2.0, rng);
  const ConicProgram p = build_subproblem(1, prev, net, 2.0, 0.1);
  std::stringstream ss;
  p.write_sparse_text(ss);

  std::string tag;
  int version = 0, nvar = 0, nblocks = 0;
  ss >> tag >> version;
  CHECK(tag == "pilotopt-conic");
  ss >> tag >> nvar;
  CHECK(nvar == p.num_variables);
  ss >> tag >> nblocks;
  std::vector<int> dims(static_cast<std::size_t>(nblocks));
  for (int& d : dims) ss >> d;
  VectorXd c = VectorXd::Zero(nvar);
  std::vector<std::map<int, MatrixXd>> coeff(static_cast<std::size_t>(nblocks));
  int neq = 0;
  MatrixXd e;
  VectorXd f;
  while (ss >> tag) {
    if (tag == "c") {
      int i;
      double v;
      ss >> i >> v;
      c(i) = v;
    } else if (tag == "F") {
      int b, var, r, col;
      double v;
      ss >> b >> var >> r >> col >> v;
      auto& m = coeff[static_cast<std::size_t>(b)][var];
      if (m.size() == 0) m = MatrixXd::Zero(dims[static_cast<std::size_t>(b)], dims[static_cast<std::size_t>(b)]);
      m(r, col) = v;
      m(col, r) = v;
    } else if (tag == "equalities") {
      ss >> neq;
      e = MatrixXd::Zero(neq, nvar);
      f = VectorXd::Zero(neq);
    } else if (tag == "E") {
      int r, col;
      double v;
      ss >> r >> col >> v;
      e(r, col) = v;
    } else if (tag == "f") {
      int r;
      double v;
      ss >> r >> v;
      f(r) = v;
    }
  }
  CHECK(c == p.objective);
  CHECK(e == p.equality_matrix);
  CHECK(f == p.equality_rhs);
  const VectorXd y = VectorXd::Random(nvar);
  for (int b = 0; b < nblocks; ++b) {
    MatrixXd m = MatrixXd::Zero(dims[static_cast<std::size_t>(b)], dims[static_cast<std::size_t>(b)]);
    for (const auto& [var, mat] : coeff[static_cast<std::size_t>(b)]) m += (var < 0 ? 1.0 : y(var)) * mat;
    CHECK(m.isApprox(p.blocks[static_cast<std::size_t>(b)].evaluate(y), 1e-14));
  }
}

TEST_CASE("complexity estimate") {
  CHECK(complexity_estimate(1, 1, std::exp(-1.0)) == doctest::Approx(59.0 * 3.0 * std::sqrt(5.0)).epsilon(1e-15));
  CHECK(complexity_estimate(1, 1, std::exp(-1.0)) == doctest::Approx(395.7840320174628).epsilon(1e-15));
  CHECK(complexity_estimate(10, 10, 1e-3) == doctest::Approx(1324300994261.081).epsilon(1e-15));
  CHECK(complexity_estimate(4, 7, 1.0 - 1e-15) < 1e-3);
  CHECK_THROWS_AS(complexity_estimate(1, 1, 0.0), ContractError);
  CHECK_THROWS_AS(complexity_estimate(1, 1, 1.0), ContractError);
}

}  // TEST_SUITE
