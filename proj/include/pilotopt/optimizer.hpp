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
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pilotopt/estimation.hpp"
#include "pilotopt/network.hpp"
#include "pilotopt/sdp_solver.hpp"

namespace pilotopt {

enum class UpdateSchedule { kJacobi, kGaussSeidel };
enum class Initializer { kBenchmark, kRandom };

std::string_view to_string(UpdateSchedule s);
std::string_view to_string(Initializer i);
UpdateSchedule parse_schedule(std::string_view text);  // throws ConfigError
Initializer parse_initializer(std::string_view text);  // throws ConfigError

struct OptimizerParams {
  double delta = 1e-2;  // sqrt(mW), summed Frobenius change
  int max_iterations = 50;
  UpdateSchedule schedule = UpdateSchedule::kJacobi;
  Initializer initializer = Initializer::kRandom;
  double eps_solver = 1e-8;
  std::uint64_t init_seed = 0;

  void validate() const;
};

/// Raised when a per-cell subproblem does not solve. realization is -1
/// outside an experiment.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(int cell, int iteration, SolverStatus status, std::string detail,
                int realization = -1);
  int cell;
  int iteration;
  SolverStatus status;
  std::string detail;
  int realization;
};

enum class TraceStatus { kConverged, kMaxIterations };
std::string_view to_string(TraceStatus s);

struct IterationRecord {
  int iteration = 0;  // 1-based
  PilotSet pilots;
  std::vector<double> objective_per_link;  // f_c / (M N) per cell at these pilots
  std::vector<double> surrogate;           // solved Tr(G) per cell
  std::vector<int> solver_iterations;
  double metric = 0.0;
};

struct OptimizationTrace {
  PilotSet initial;
  std::vector<double> initial_objective_per_link;
  std::vector<IterationRecord> iterations;
  TraceStatus status = TraceStatus::kMaxIterations;

  int iterations_used() const { return static_cast<int>(iterations.size()); }
  const PilotSet& final_pilots() const {
    return iterations.empty() ? initial : iterations.back().pilots;
  }
};

/// Orthonormalized eigenvectors of a uniform random tau x tau matrix, each
/// column carrying energy per_symbol_power * tau. User n of every cell gets
/// column n mod tau.
PilotSet benchmark_pilots(int pilot_length, int num_users, int num_cells,
                          double per_symbol_power_mw, std::uint64_t seed);

/// Independent per-cell starting points: sqrt(p_max) U V^H from the thin SVD
/// of a complex Gaussian tau x N matrix, so every nonzero singular value sits
/// at the power limit.
PilotSet random_pilots(int pilot_length, int num_users, int num_cells, double p_max,
                       std::uint64_t seed);

PilotSet initial_pilots(const OptimizerParams& params, const SystemConfig& config);

/// sum_c ||current_c - previous_c||_F
double convergence_metric(const PilotSet& current, const PilotSet& previous);

/// f_c / (M N) for every cell.
std::vector<double> objective_per_link(const PilotSet& pilots, const NetworkRealization& net,
                                       double noise_var);

OptimizationTrace run_algorithm1(const NetworkRealization& net, const OptimizerParams& params,
                                 const SystemConfig& config);
OptimizationTrace run_algorithm1(const NetworkRealization& net, const OptimizerParams& params,
                                 const SystemConfig& config, const PilotSet& start);

/// iteration,cell,objective_per_link,convergence_metric
void write_trace_csv(std::ostream& os, const OptimizationTrace& trace);

/// Comment header with tau, N, C and units, then one row per (cell, symbol)
/// holding re/im pairs for every user.
void write_pilots_csv(std::ostream& os, const PilotSet& pilots);
PilotSet read_pilots_csv(std::istream& is);

}  // namespace pilotopt
