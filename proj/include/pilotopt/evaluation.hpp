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
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "pilotopt/optimizer.hpp"

namespace pilotopt {

enum class Scheme { kProposed, kBenchmark };
std::string_view to_string(Scheme s);

double per_link_mse(double f_value, int num_antennas, int num_users);

/// Sorted distinct values with P(X <= value); ties collapse onto one point.
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> samples);

/// |X_c[i, n]|^2 for every cell c, symbol i, user n (cell-major, then user, then symbol).
std::vector<double> per_symbol_power(const PilotSet& pilots);

struct SeSettings {
  double data_power_mw = 200.0;
  int coherence_length = 200;
  int num_antennas = 500;
  double noise_var = 0.0;
  int n_draws = 2000;
  std::uint64_t seed = 0;
};

/// Use-and-then-forget uplink SE with MR combining on the MMSE estimates.
/// Expectations are sample means over n_draws joint channel/noise draws.
/// Result is indexed [cell * N + user].
std::vector<double> uplink_se_uatf(const PilotSet& pilots, const NetworkRealization& net,
                                   const SeSettings& settings);

struct RealizationRecord {
  int realization = 0;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::kProposed;
  int pilot_length = 0;
  std::vector<double> mse_per_link;  // per cell
  std::vector<double> symbol_power;  // per_symbol_power layout
  std::vector<double> se;            // per user, empty when not computed
  int iterations = 0;
  TraceStatus status = TraceStatus::kConverged;
  // proposed only: per-iteration per-cell objective and metric, iteration 0 first
  std::vector<std::vector<double>> objective_history;
  std::vector<double> metric_history;

  double mean_mse() const;
  double mean_power() const;
  double mean_se() const;
};

struct SchemeSummary {
  double mean_mse = 0.0;
  double mean_power = 0.0;
  double mean_se = 0.0;
  double converged_fraction = 0.0;
};

struct ExperimentResult {
  int pilot_length = 0;
  std::vector<RealizationRecord> records;  // realization-major, proposed before benchmark
  SchemeSummary proposed;
  SchemeSummary benchmark;

  std::vector<double> pooled_mse(Scheme s) const;
  std::vector<double> pooled_power(Scheme s) const;
};

struct ExperimentOptions {
  bool compute_se = false;
  int jobs = 1;
};

/// Per-realization seed derived from the master seed.
std::uint64_t realization_seed(std::uint64_t master, int realization);

/// mc_realizations drops, each optimized with the successive method and compared
/// against the benchmark pilots. Deterministic for a given master seed and
/// independent of the job count.
ExperimentResult run_experiment(const SystemConfig& config, const OptimizerParams& params,
                                const ExperimentOptions& options = {});

/// CSV writers; each takes the experiments of a pilot-length sweep.
void write_results_csv(std::ostream& os, const std::vector<ExperimentResult>& sweep);
void write_cdf_mse_csv(std::ostream& os, const std::vector<ExperimentResult>& sweep);
void write_cdf_power_csv(std::ostream& os, const std::vector<ExperimentResult>& sweep);
void write_convergence_csv(std::ostream& os, const std::vector<ExperimentResult>& sweep);
void write_se_table_csv(std::ostream& os, const std::vector<ExperimentResult>& sweep);

}  // namespace pilotopt
