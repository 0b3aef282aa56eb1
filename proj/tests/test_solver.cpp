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
#include <fstream>
#include <string>

#include "pilotopt/conic.hpp"
#include "pilotopt/estimation.hpp"
#include "pilotopt/sdp_solver.hpp"
#include "support.hpp"

using namespace pilotopt;

namespace {

struct ReferenceInstance {
  int n = 0;
  int tau = 0;
  double p_max = 0.0;
  VectorXd sqrt_gains;
  MatrixXcd x_prev;
  MatrixXcd f;
  double objective = 0.0;
};

MatrixXcd read_complex(std::istream& is, int rows, int cols) {
  MatrixXcd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      double re, im;
      is >> re >> im;
      m(i, j) = cplx(re, im);
    }
  }
  return m;
}

std::vector<ReferenceInstance> load_reference(const std::string& name = "subproblem_reference.txt") {
  std::ifstream is(std::string(PILOTOPT_TEST_DATA_DIR) + "/" + name);
  REQUIRE(is.good());
  std::string tag;
  int count = 0;
  is >> tag >> count;
  std::vector<ReferenceInstance> out(static_cast<std::size_t>(count));
  for (auto& r : out) {
    is >> tag >> r.n >> r.tau >> r.p_max;
    is >> tag;
    r.sqrt_gains.resize(r.n);
    for (int i = 0; i < r.n; ++i) is >> r.sqrt_gains(i);
    is >> tag;
    r.x_prev = read_complex(is, r.tau, r.n);
    is >> tag;
    r.f = read_complex(is, r.tau, r.tau);
    is >> tag >> r.objective;
  }
  REQUIRE(is.good());
  return out;
}

void check_report(const ConicProgram& p, const SolverReport& rep, double p_max) {
  REQUIRE(rep.ok());
  CHECK(rep.relative_gap <= 1e-8);
  CHECK(rep.max_psd_violation <= 1e-6);
  const int n = p.layout->num_users;
  const int tau = p.layout->pilot_length;
  // recovered complex matrices satisfy the complex-domain constraints
  CHECK(p.max_hermitian_psd_violation(rep.solution) <= 1e-6);
  const double lam = (rep.pilot.adjoint() * rep.pilot).selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();
  CHECK(lam <= p_max * (1.0 + 1e-6));
  CHECK(rep.pilot.rows() == tau);
  CHECK(rep.g.rows() == n);
  CHECK(rep.objective == doctest::Approx(rep.g.trace().real()).epsilon(1e-9));
  CAPTURE(rep.a.norm());
  CHECK(p.equality_residual(rep.solution) <= 1e-6 * (1.0 + rep.a.cwiseAbs().maxCoeff()));
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("small hand-built programs") {
  SUBCASE("min t s.t. [[t, 1], [1, t]] >= 0") {
    ConicProgram p;
    p.num_variables = 1;
    p.objective = VectorXd::Ones(1);
    LmiBlock b;
    b.dim = 2;
    b.constant = MatrixXd::Zero(2, 2);
    b.constant(0, 1) = b.constant(1, 0) = 1.0;
    b.terms.push_back({0, {{0, 0, 1.0}, {1, 1, 1.0}}});
    p.blocks.push_back(b);
    p.equality_matrix = MatrixXd::Zero(0, 1);
    p.equality_rhs = VectorXd::Zero(0);
    const SolverReport rep = solve(p);
    REQUIRE(rep.ok());
    CHECK(rep.objective == doctest::Approx(1.0).epsilon(1e-7));
  }
  SUBCASE("diagonal block with an equality") {
    ConicProgram p;
    p.num_variables = 2;
    p.objective = VectorXd::Ones(2);
    LmiBlock b;
    b.dim = 2;
    b.constant = MatrixXd::Zero(2, 2);
    b.terms.push_back({0, {{0, 0, 1.0}}});
    b.terms.push_back({1, {{1, 1, 1.0}}});
    p.blocks.push_back(b);
    p.equality_matrix = MatrixXd(1, 2);
    p.equality_matrix << 1.0, -1.0;
    p.equality_rhs = VectorXd::Ones(1);
    const SolverReport rep = solve(p);
    REQUIRE(rep.ok());
    CHECK(rep.objective == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(rep.solution(0) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("scalar subproblem reaches full power") {
  const auto net = testing::uniform_gain_network(1, 1, 1.0);
  PilotSet prev = PilotSet::zeros(1, 1, 1);
  prev[0](0, 0) = 1.0;
  const ConicProgram p = build_subproblem(0, prev, net, 1.0, 1.0);
  const SolverReport rep = solve(p, 1e-8);
  check_report(p, rep, 1.0);
  CHECK(rep.objective == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(std::norm(rep.pilot(0, 0)) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("single-cell symmetric fixed point") {
  Rng rng(7);
  for (int n : {1, 2, 4}) {
    const double phi = 2.0, p_max = 3.0, s2 = 0.5;
    const auto net = testing::uniform_gain_network(1, n, phi);
    Eigen::HouseholderQR<MatrixXcd> qr(complex_normal_matrix(rng, n, n));
    PilotSet prev;
    prev.pilots.push_back(std::sqrt(p_max) * MatrixXcd(qr.householderQ()));
    const ConicProgram p = build_subproblem(0, prev, net, p_max, s2);
    const SolverReport rep = solve(p);
    check_report(p, rep, p_max);
    CHECK(rep.objective == doctest::Approx(n / (1.0 + phi * p_max / s2)).epsilon(1e-5));
    CHECK(rep.objective == doctest::Approx(mse_woodbury(prev, net, 0, 1, s2)).epsilon(1e-5));
    const MatrixXcd gram = rep.pilot.adjoint() * rep.pilot;
    CHECK((gram - p_max * MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-6 * p_max);
  }
}

TEST_CASE("agrees with an independent reference solver") {
  for (const ReferenceInstance& r : load_reference()) {
    CAPTURE(r.n);
    CAPTURE(r.tau);
    const ConicProgram p = build_subproblem(r.x_prev, r.sqrt_gains, r.f, r.p_max);
    const SolverReport rep = solve(p, 1e-8);
    check_report(p, rep, r.p_max);
    CHECK(testing::rel_diff(rep.objective, r.objective) <= 1e-5);
  }
}

TEST_CASE("slow-start subproblem from a full-size drop") {
  // late iterate of a 4-cell, 10-user, tau 16 run; the gap stays near 1 for several steps
  const ReferenceInstance r = load_reference("subproblem_regression.txt").at(0);
  const ConicProgram p = build_subproblem(r.x_prev, r.sqrt_gains, r.f, r.p_max);
  const SolverReport rep = solve(p, 1e-8);
  check_report(p, rep, r.p_max);
  // the stored value is a certified upper bound
  CHECK(rep.objective <= r.objective * (1.0 + 1e-8));
  CHECK(testing::rel_diff(rep.objective, r.objective) <= 1e-6);
}

TEST_CASE("random subproblems: recovery and surrogate descent") {
  Rng rng(8);
  for (int trial = 0; trial < 25; ++trial) {
    const int cells = 2 + trial % 3, n = 1 + trial % 5, tau = 1 + (trial * 3) % 8;
    const double p_max = 200.0 * tau, s2 = 2.5e-10;
    // realistic gain range: -60 .. -130 dB
    const auto net = testing::random_gain_network(cells, n, rng, 1e-13, 1e-6);
    const auto prev = testing::random_feasible_pilots(cells, tau, n, p_max, rng);
    const int cell = trial % cells;
    const ConicProgram p = build_subproblem(cell, prev, net, p_max, s2);
    const SolverReport rep = solve(p);
    CAPTURE(trial);
    check_report(p, rep, p_max);
    CHECK(rep.objective <= mse_woodbury(prev, net, cell, 1, s2) * (1.0 + 1e-7));
  }
}

}  // TEST_SUITE
