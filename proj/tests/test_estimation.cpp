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

#include "pilotopt/estimation.hpp"
#include "support.hpp"

using namespace pilotopt;
using testing::rel_diff;

TEST_SUITE("estimation") {

TEST_CASE("pilot set shape and feasibility") {
  PilotSet p = PilotSet::zeros(2, 3, 2);
  CHECK_NOTHROW(p.check_shape());
  CHECK(p.feasible(1.0));
  p[0](0, 0) = 2.0;
  CHECK(p.max_gram_eigenvalue(0) == doctest::Approx(4.0));
  CHECK_FALSE(p.feasible(3.9));
  p.pilots.push_back(MatrixXcd::Zero(2, 2));
  CHECK_THROWS_AS(p.check_shape(), ContractError);
}

TEST_CASE("received training") {
  Rng rng(1);
  SUBCASE("zero pilots leave only noise") {
    const auto net = testing::random_gain_network(3, 2, rng);
    const auto pilots = PilotSet::zeros(3, 4, 2);
    const auto ch = draw_channel_realization(3, 2, 5, 4, 0.7, rng);
    for (int b = 0; b < 3; ++b) CHECK(received_training(pilots, net, ch, b) == ch.noise[b]);
  }
  SUBCASE("scalar channel") {
    const auto net = testing::uniform_gain_network(1, 1, 1.0);
    PilotSet pilots = PilotSet::zeros(1, 1, 1);
    pilots[0](0, 0) = std::sqrt(3.0);
    auto ch = draw_channel_realization(1, 1, 1, 1, 1.0, rng);
    ch.noise[0].setZero();
    const MatrixXcd y = received_training(pilots, net, ch, 0);
    CHECK(std::abs(y(0, 0) - std::sqrt(3.0) * ch.small_scale[0](0, 0)) < 1e-15);
  }
  SUBCASE("per-antenna summation") {
    const int cells = 3, users = 2, tau = 3, m = 4;
    const auto net = testing::random_gain_network(cells, users, rng);
    const auto pilots = testing::random_feasible_pilots(cells, tau, users, 5.0, rng);
    const auto ch = draw_channel_realization(cells, users, m, tau, 0.3, rng);
    for (int b = 0; b < cells; ++b) {
      const MatrixXcd y = received_training(pilots, net, ch, b);
      for (int ant = 0; ant < m; ++ant) {
        for (int t = 0; t < tau; ++t) {
          cplx acc = ch.noise[b](t, ant);
          for (int c = 0; c < cells; ++c) {
            for (int n = 0; n < users; ++n) {
              acc += pilots[c](t, n) * std::sqrt(net.gains(c, b)(n)) * ch.channel(c, b)(n, ant);
            }
          }
          CHECK(std::abs(y(t, ant) - acc) < 1e-12 * (1.0 + std::abs(acc)));
        }
      }
    }
  }
}

TEST_CASE("interference matrix") {
  Rng rng(2);
  const double s2 = 0.25;
  SUBCASE("single cell is white noise") {
    const auto net = testing::random_gain_network(1, 3, rng);
    const auto pilots = testing::random_feasible_pilots(1, 4, 3, 2.0, rng);
    CHECK(interference_matrix(pilots, net, 0, s2).isApprox(s2 * MatrixXcd::Identity(4, 4)));
  }
  SUBCASE("silent interferer") {
    const auto net = testing::random_gain_network(2, 3, rng);
    auto pilots = testing::random_feasible_pilots(2, 4, 3, 2.0, rng);
    pilots[1].setZero();
    CHECK(interference_matrix(pilots, net, 0, s2) == s2 * MatrixXcd::Identity(4, 4));
  }
  SUBCASE("positive definite above the noise floor") {
    for (int trial = 0; trial < 50; ++trial) {
      const auto net = testing::random_gain_network(3, 4, rng);
      const auto pilots = testing::random_feasible_pilots(3, 5, 4, 3.0, rng);
      for (int b = 0; b < 3; ++b) {
        const MatrixXcd f = interference_matrix(pilots, net, b, s2);
        CHECK((f - f.adjoint()).norm() == 0.0);
        const double lo = f.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff();
        CHECK(lo >= s2 * (1.0 - 1e-10));
      }
    }
  }
}

TEST_CASE("MMSE estimate") {
  Rng rng(3);
  SUBCASE("scalar Wiener filter") {
    const double p = 2.0, s2 = 0.5;
    const auto net = testing::uniform_gain_network(1, 1, 1.0);
    PilotSet pilots = PilotSet::zeros(1, 1, 1);
    pilots[0](0, 0) = std::sqrt(p);
    MatrixXcd y(1, 1);
    y(0, 0) = cplx(0.3, -1.2);
    const MatrixXcd h = mmse_estimate(y, pilots, net, 0, s2);
    CHECK(std::abs(h(0, 0) - std::sqrt(p) / (p + s2) * y(0, 0)) < 1e-15);
  }
  SUBCASE("zero pilots give a zero estimate") {
    const auto net = testing::random_gain_network(2, 3, rng);
    const auto pilots = PilotSet::zeros(2, 3, 3);
    const MatrixXcd y = complex_normal_matrix(rng, 3, 6);
    CHECK(mmse_estimate(y, pilots, net, 1, 0.1).isZero(0.0));
  }
  SUBCASE("matches cross-covariance times inverse covariance") {
    for (int trial = 0; trial < 30; ++trial) {
      const int cells = 1 + trial % 4, users = 1 + trial % 5, tau = 1 + trial % 7;
      const auto net = testing::random_gain_network(cells, users, rng);
      const auto pilots = testing::random_feasible_pilots(cells, tau, users, 4.0, rng);
      const double s2 = 0.2;
      const int b = trial % cells;
      // per-antenna y = sum_c X_c D^{1/2} h_c + v
      MatrixXcd cyy = s2 * MatrixXcd::Identity(tau, tau);
      for (int c = 0; c < cells; ++c) {
        for (int n = 0; n < users; ++n) {
          cyy += net.gains(c, b)(n) * pilots[c].col(n) * pilots[c].col(n).adjoint();
        }
      }
      MatrixXcd chy(users, tau);
      for (int n = 0; n < users; ++n) {
        chy.row(n) = std::sqrt(net.gains(b, b)(n)) * pilots[b].col(n).adjoint();
      }
      const MatrixXcd oracle = chy * cyy.inverse();
      const MatrixXcd y = complex_normal_matrix(rng, tau, 3);
      const MatrixXcd est = mmse_estimate(y, pilots, net, b, s2);
      CHECK((est - oracle * y).norm() <= 1e-9 * (1.0 + (oracle * y).norm()));
    }
  }
  SUBCASE("estimate does not depend on the antenna count") {
    const auto net = testing::random_gain_network(3, 4, rng);
    const auto pilots = testing::random_feasible_pilots(3, 5, 4, 2.0, rng);
    const MatrixXcd w = mmse_filter(pilots, net, 1, 0.1);
    const MatrixXcd y = complex_normal_matrix(rng, 5, 500);
    for (int m : {1, 8, 500}) {
      const MatrixXcd est = mmse_estimate(y.leftCols(m), pilots, net, 1, 0.1);
      CHECK(mmse_filter(pilots, net, 1, 0.1) == w);
      CHECK((est - w * y.leftCols(m)).norm() <= 1e-13 * (w * y.leftCols(m)).norm());
    }
  }
}

TEST_CASE("analytic MSE forms") {
  Rng rng(4);
  SUBCASE("zero pilots reach the upper bound") {
    const auto net = testing::random_gain_network(2, 3, rng);
    const auto pilots = PilotSet::zeros(2, 4, 3);
    CHECK(mse_direct(pilots, net, 0, 7, 0.1) == doctest::Approx(21.0).epsilon(1e-14));
    CHECK(mse_woodbury(pilots, net, 0, 7, 0.1) == doctest::Approx(21.0).epsilon(1e-14));
  }
  SUBCASE("scalar posterior variance") {
    const auto net = testing::uniform_gain_network(1, 1, 1.0);
    PilotSet pilots = PilotSet::zeros(1, 1, 1);
    pilots[0](0, 0) = 1.0;
    CHECK(mse_direct(pilots, net, 0, 9, 1.0) == doctest::Approx(4.5).epsilon(1e-14));
    CHECK(mse_woodbury(pilots, net, 0, 9, 1.0) == doctest::Approx(4.5).epsilon(1e-14));
  }
  SUBCASE("single-cell closed form") {
    const double phi = 3.0, p = 2.0, s2 = 0.5;
    const int n = 3, m = 10;
    const auto net = testing::uniform_gain_network(1, n, phi);
    PilotSet pilots;
    Eigen::HouseholderQR<MatrixXcd> qr(complex_normal_matrix(rng, 4, n));
    pilots.pilots.push_back(std::sqrt(p) * (qr.householderQ() * MatrixXcd::Identity(4, n)));
    CHECK(mse_woodbury(pilots, net, 0, m, s2) == doctest::Approx(m * n / (1.0 + phi * p / s2)).epsilon(1e-12));
  }
  SUBCASE("direct and Woodbury forms agree") {
    for (int trial = 0; trial < 200; ++trial) {
      const int cells = 1 + trial % 4, users = 1 + (trial / 4) % 10, tau = 1 + (trial * 7) % 16;
      const auto net = testing::random_gain_network(cells, users, rng);
      const auto pilots = testing::random_feasible_pilots(cells, tau, users, 10.0, rng);
      for (int b = 0; b < cells; ++b) {
        const double w = mse_woodbury(pilots, net, b, 100, 0.05);
        CHECK(rel_diff(mse_direct(pilots, net, b, 100, 0.05), w) <= 1e-8);
        CHECK(w > 0.0);
        CHECK(w <= 100.0 * users * (1.0 + 1e-12));
      }
    }
  }
  SUBCASE("more power does not hurt an orthogonal pilot") {
    for (int trial = 0; trial < 20; ++trial) {
      const int users = 1 + trial % 4, tau = users + trial % 3;
      const auto net = testing::random_gain_network(3, users, rng);
      auto pilots = testing::random_feasible_pilots(3, tau, users, 1.0, rng);
      Eigen::HouseholderQR<MatrixXcd> qr(complex_normal_matrix(rng, tau, users));
      pilots[0] = qr.householderQ() * MatrixXcd::Identity(tau, users);
      double prev = mse_woodbury(pilots, net, 0, 1, 0.1);
      for (double alpha : {1.5, 2.0, 4.0, 10.0}) {
        PilotSet scaled = pilots;
        scaled[0] *= std::sqrt(alpha);
        const double cur = mse_woodbury(scaled, net, 0, 1, 0.1);
        CHECK(cur <= prev * (1.0 + 1e-12));
        prev = cur;
      }
    }
  }
}

TEST_CASE("empirical MSE") {
  Rng rng(5);
  SUBCASE("zero pilots") {
    const auto net = testing::random_gain_network(2, 2, rng);
    const auto pilots = PilotSet::zeros(2, 2, 2);
    const auto mc = empirical_mse(pilots, net, 0, 4, 0.1, 10000, 11);
    CHECK(std::abs(mc.mean - 8.0) <= 3.0 * mc.standard_error);
  }
  SUBCASE("scalar case") {
    const auto net = testing::uniform_gain_network(1, 1, 1.0);
    PilotSet pilots = PilotSet::zeros(1, 1, 1);
    pilots[0](0, 0) = 1.0;
    const auto mc = empirical_mse(pilots, net, 0, 6, 1.0, 10000, 12);
    CHECK(std::abs(mc.mean - 3.0) <= 3.0 * mc.standard_error);
  }
  SUBCASE("random instance") {
    const auto net = testing::random_gain_network(3, 3, rng);
    const auto pilots = testing::random_feasible_pilots(3, 4, 3, 5.0, rng);
    const auto mc = empirical_mse(pilots, net, 2, 5, 0.2, 10000, 13);
    CHECK(std::abs(mc.mean - mse_woodbury(pilots, net, 2, 5, 0.2)) <= 3.0 * mc.standard_error);
  }
  SUBCASE("preconditions") {
    const auto net = testing::uniform_gain_network(1, 1, 1.0);
    const auto pilots = PilotSet::zeros(1, 1, 1);
    CHECK_THROWS_AS(empirical_mse(pilots, net, 0, 1, 1.0, 99, 0), ContractError);
  }
}

TEST_CASE("estimation bundle error definition") {
  Rng rng(6);
  const auto net = testing::random_gain_network(2, 2, rng);
  const auto pilots = testing::random_feasible_pilots(2, 3, 2, 2.0, rng);
  const auto ch = draw_channel_realization(2, 2, 6, 3, 0.1, rng);
  const auto bundle = estimate_channel(pilots, net, ch, 1, 0.1);
  CHECK(bundle.error == ch.channel(1, 1) - bundle.estimate);
  CHECK(bundle.analytic_mse == doctest::Approx(mse_woodbury(pilots, net, 1, 6, 0.1)).epsilon(1e-12));
}

TEST_CASE("Hermitian inverse refuses indefinite input") {
  MatrixXcd m = MatrixXcd::Identity(2, 2);
  m(1, 1) = -1.0;
  CHECK_THROWS_AS(hermitian_pd_inverse(m, "test"), NumericalError);
}

}  // TEST_SUITE
