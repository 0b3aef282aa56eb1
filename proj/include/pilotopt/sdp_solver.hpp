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

#include <string_view>

#include "pilotopt/conic.hpp"

namespace pilotopt {

enum class SolverStatus { kOptimal, kInfeasible, kNumericalFailure, kIterationLimit };

std::string_view to_string(SolverStatus status);

struct SolverSettings {
  double gap_tolerance = 1e-8;          // relative duality gap
  double feasibility_tolerance = 1e-8;  // relative primal residual
  double dual_feasibility_tolerance = 1e-8;
  int max_iterations = 100;
  int polish_iterations = 2;  // extra steps once all tolerances are met
};

struct SolverReport {
  SolverStatus status = SolverStatus::kNumericalFailure;
  double objective = 0.0;
  VectorXd solution;
  double max_psd_violation = 0.0;  // max over blocks of -lambda_min at the returned point
  double equality_residual = 0.0;  // max |E y - f|
  double duality_gap = 0.0;        // <S, Z>
  double relative_gap = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;

  // filled when the program carries a SubproblemLayout
  MatrixXcd pilot;
  MatrixXcd g;
  MatrixXcd a;

  bool ok() const { return status == SolverStatus::kOptimal; }
};

/// Primal-dual path-following solve (HKM direction, Mehrotra predictor-corrector,
/// infeasible start) of a ConicProgram. Equalities enter the Newton system
/// through an augmented Schur complement; nothing is eliminated up front.
/// The data are equilibrated internally and the best iterate is returned.
SolverReport solve(const ConicProgram& program, const SolverSettings& settings = {});

inline SolverReport solve(const ConicProgram& program, double eps_solver) {
  SolverSettings s;
  s.gap_tolerance = eps_solver;
  return solve(program, s);
}

}  // namespace pilotopt
