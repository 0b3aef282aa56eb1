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

#include "pilotopt/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>
#include <thread>

#include "pilotopt/io.hpp"

namespace pilotopt {

std::string_view to_string(Scheme s) { return s == Scheme::kProposed ? "proposed" : "benchmark"; }

double per_link_mse(double f_value, int num_antennas, int num_users) {
  if (!(f_value >= 0.0)) throw ContractError("per_link_mse: f must be nonnegative");
  if (num_antennas < 1 || num_users < 1) throw ContractError("per_link_mse: M and N must be positive");
  return f_value / (static_cast<double>(num_antennas) * num_users);
}

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> samples) {
  if (samples.empty()) throw ContractError("empirical_cdf: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    out.emplace_back(samples[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

std::vector<double> per_symbol_power(const PilotSet& pilots) {
  pilots.check_shape();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(pilots.num_cells() * pilots.num_users() *
                                       pilots.pilot_length()));
  for (int c = 0; c < pilots.num_cells(); ++c) {
    for (int n = 0; n < pilots.num_users(); ++n) {
      for (int i = 0; i < pilots.pilot_length(); ++i) out.push_back(std::norm(pilots[c](i, n)));
    }
  }
  return out;
}

std::vector<double> uplink_se_uatf(const PilotSet& pilots, const NetworkRealization& net,
                                   const SeSettings& s) {
  pilots.check_shape();
  const int C = net.num_cells;
  const int N = net.num_users;
  const int tau = pilots.pilot_length();
  const int M = s.num_antennas;
  if (pilots.num_cells() != C || pilots.num_users() != N) {
    throw ContractError("uplink_se_uatf: pilots do not match the network");
  }
  if (s.coherence_length <= tau) throw ContractError("uplink_se_uatf: coherence length must exceed tau");
  if (s.n_draws < 1000) throw ContractError("uplink_se_uatf: need at least 1000 draws");
  if (M < 1) throw ContractError("uplink_se_uatf: need at least one antenna");
  if (!(s.data_power_mw >= 0.0)) throw ContractError("uplink_se_uatf: negative data power");
  if (!(s.noise_var > 0.0)) throw ContractError("uplink_se_uatf: noise variance must be positive");

  std::vector<MatrixXcd> filters;  // sqrt(d_k) * W row k: maps Y_b to the full-channel estimate
  for (int b = 0; b < C; ++b) {
    filters.push_back(net.gains(b, b).cwiseSqrt().asDiagonal() *
                      mmse_filter(pilots, net, b, s.noise_var));
  }

  std::vector<VectorXcd> sum_own(static_cast<std::size_t>(C), VectorXcd::Zero(N));
  std::vector<MatrixXd> sum_sq(static_cast<std::size_t>(C), MatrixXd::Zero(N, C * N));
  std::vector<VectorXd> sum_norm(static_cast<std::size_t>(C), VectorXd::Zero(N));

  Rng rng(s.seed);
  MatrixXcd all(C * N, M);
  for (int draw = 0; draw < s.n_draws; ++draw) {
    const ChannelRealization ch = draw_channel_realization(C, N, M, tau, s.noise_var, rng);
    for (int b = 0; b < C; ++b) {
      const MatrixXcd v = filters[static_cast<std::size_t>(b)] * received_training(pilots, net, ch, b);
      for (int c = 0; c < C; ++c) {
        all.middleRows(c * N, N) = net.gains(c, b).cwiseSqrt().asDiagonal() * ch.channel(c, b);
      }
      const MatrixXcd g = v.conjugate() * all.transpose();  // g(k, j) = v_k^H h_j
      auto& own = sum_own[static_cast<std::size_t>(b)];
      for (int k = 0; k < N; ++k) own(k) += g(k, b * N + k);
      sum_sq[static_cast<std::size_t>(b)] += g.cwiseAbs2();
      sum_norm[static_cast<std::size_t>(b)] += v.rowwise().squaredNorm();
    }
  }

  const double inv = 1.0 / s.n_draws;
  const double prelog = 1.0 - static_cast<double>(tau) / s.coherence_length;
  const double p = s.data_power_mw;
  std::vector<double> se;
  se.reserve(static_cast<std::size_t>(C * N));
  for (int b = 0; b < C; ++b) {
    for (int k = 0; k < N; ++k) {
      const double signal = std::norm(sum_own[static_cast<std::size_t>(b)](k) * inv);
      const double total = sum_sq[static_cast<std::size_t>(b)].row(k).sum() * inv;
      const double noise = s.noise_var * sum_norm[static_cast<std::size_t>(b)](k) * inv;
      const double denom = p * total - p * signal + noise;
      const double sinr = denom > 0.0 ? p * signal / denom : 0.0;
      se.push_back(prelog * std::log2(1.0 + sinr));
    }
  }
  return se;
}

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double RealizationRecord::mean_mse() const { return mean_of(mse_per_link); }
double RealizationRecord::mean_power() const { return mean_of(symbol_power); }
double RealizationRecord::mean_se() const { return mean_of(se); }

std::vector<double> ExperimentResult::pooled_mse(Scheme s) const {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.scheme == s) out.insert(out.end(), r.mse_per_link.begin(), r.mse_per_link.end());
  }
  return out;
}

std::vector<double> ExperimentResult::pooled_power(Scheme s) const {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.scheme == s) out.insert(out.end(), r.symbol_power.begin(), r.symbol_power.end());
  }
  return out;
}

std::uint64_t realization_seed(std::uint64_t master, int realization) {
  return mix_seed(master, static_cast<std::uint64_t>(realization));
}

namespace {

constexpr std::uint64_t kBenchmarkStream = 101;
constexpr std::uint64_t kInitStream = 102;
constexpr std::uint64_t kSeStream = 103;

std::pair<RealizationRecord, RealizationRecord> run_realization(const SystemConfig& config,
                                                                OptimizerParams params,
                                                                const ExperimentOptions& options,
                                                                int r) {
  const std::uint64_t seed = realization_seed(config.rng_seed, r);
  const NetworkRealization net = generate_network(config, seed);
  const double noise_var = noise_variance_mw(config);
  const std::uint64_t bench_seed = mix_seed(seed, kBenchmarkStream);
  const PilotSet bench = benchmark_pilots(config.pilot_length, config.num_users, config.num_cells,
                                          config.per_symbol_power_mw, bench_seed);
  params.init_seed =
      params.initializer == Initializer::kBenchmark ? bench_seed : mix_seed(seed, kInitStream);

  OptimizationTrace trace;
  try {
    trace = run_algorithm1(net, params, config);
  } catch (const SolverFailure& e) {
    throw SolverFailure(e.cell, e.iteration, e.status, e.detail, r);
  }

  SeSettings se;
  se.data_power_mw = config.data_power_mw;
  se.coherence_length = config.coherence_length;
  se.num_antennas = config.num_antennas;
  se.noise_var = noise_var;
  se.n_draws = config.se_draws;
  se.seed = mix_seed(seed, kSeStream);  // shared by both schemes

  auto make = [&](Scheme scheme, const PilotSet& pilots) {
    RealizationRecord rec;
    rec.realization = r;
    rec.seed = seed;
    rec.scheme = scheme;
    rec.pilot_length = config.pilot_length;
    rec.mse_per_link = objective_per_link(pilots, net, noise_var);
    rec.symbol_power = per_symbol_power(pilots);
    if (options.compute_se) rec.se = uplink_se_uatf(pilots, net, se);
    return rec;
  };

  RealizationRecord proposed = make(Scheme::kProposed, trace.final_pilots());
  proposed.iterations = trace.iterations_used();
  proposed.status = trace.status;
  proposed.objective_history.push_back(trace.initial_objective_per_link);
  proposed.metric_history.push_back(0.0);
  for (const IterationRecord& it : trace.iterations) {
    proposed.objective_history.push_back(it.objective_per_link);
    proposed.metric_history.push_back(it.metric);
  }
  RealizationRecord benchmark = make(Scheme::kBenchmark, bench);
  return {std::move(proposed), std::move(benchmark)};
}

SchemeSummary summarize(const std::vector<RealizationRecord>& records, Scheme scheme) {
  SchemeSummary s;
  std::vector<double> mse;
  std::vector<double> power;
  std::vector<double> se;
  int converged = 0;
  int count = 0;
  for (const auto& r : records) {
    if (r.scheme != scheme) continue;
    ++count;
    mse.push_back(r.mean_mse());
    power.insert(power.end(), r.symbol_power.begin(), r.symbol_power.end());
    se.insert(se.end(), r.se.begin(), r.se.end());
    if (r.status == TraceStatus::kConverged) ++converged;
  }
  s.mean_mse = mean_of(mse);
  s.mean_power = mean_of(power);
  s.mean_se = mean_of(se);
  s.converged_fraction = count > 0 ? static_cast<double>(converged) / count : 0.0;
  return s;
}

}  // namespace

ExperimentResult run_experiment(const SystemConfig& config, const OptimizerParams& params,
                                const ExperimentOptions& options) {
  config.validate();
  params.validate();
  const int R = config.mc_realizations;
  std::vector<std::pair<RealizationRecord, RealizationRecord>> slots(static_cast<std::size_t>(R));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(R));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int r = next++; r < R; r = next++) {
      try {
        slots[static_cast<std::size_t>(r)] = run_realization(config, params, options, r);
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    }
  };
  const int jobs = std::clamp(options.jobs, 1, std::max(1, R));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentResult out;
  out.pilot_length = config.pilot_length;
  for (auto& [proposed, benchmark] : slots) {
    out.records.push_back(std::move(proposed));
    out.records.push_back(std::move(benchmark));
  }
  out.proposed = summarize(out.records, Scheme::kProposed);
  out.benchmark = summarize(out.records, Scheme::kBenchmark);
  return out;
}

void write_results_csv(std::ostream& os, const std::vector<ExperimentResult>& sweep) {
  os << "tau,realization,seed,scheme,iterations,status,mean_mse_per_link,mean_symbol_power_mw,"
        "mean_se_bits_per_hz\n";
  for (const auto& ex : sweep) {
    for (const auto& r : ex.records) {
      os << r.pilot_length << ',' << r.realization << ',' << r.seed << ',' << to_string(r.scheme)
         << ',' << r.iterations << ','
         << (r.scheme == Scheme::kBenchmark ? std::string_view("none") : to_string(r.status)) << ','
         << format_double(r.mean_mse()) << ',' << format_double(r.mean_power()) << ',';
      if (!r.se.empty()) os << format_double(r.mean_se());
      os << '\n';
    }
  }
}

namespace {

void write_cdf(std::ostream& os, const std::vector<ExperimentResult>& sweep, bool power) {
  os << "tau,scheme,value,probability\n";
  for (const auto& ex : sweep) {
    for (Scheme s : {Scheme::kProposed, Scheme::kBenchmark}) {
      const auto samples = power ? ex.pooled_power(s) : ex.pooled_mse(s);
      if (samples.empty()) continue;
      for (const auto& [v, p] : empirical_cdf(samples)) {
        os << ex.pilot_length << ',' << to_string(s) << ',' << format_double(v) << ','
           << format_double(p) << '\n';
      }
    }
  }
}

}  // namespace

void write_cdf_mse_csv(std::ostream& os, const std::vector<ExperimentResult>& sweep) {
  write_cdf(os, sweep, false);
}

void write_cdf_power_csv(std::ostream& os, const std::vector<ExperimentResult>& sweep) {
  write_cdf(os, sweep, true);
}

void write_convergence_csv(std::ostream& os, const std::vector<ExperimentResult>& sweep) {
  os << "tau,realization,iteration,cell,objective_per_link,convergence_metric\n";
  for (const auto& ex : sweep) {
    for (const auto& r : ex.records) {
      if (r.scheme != Scheme::kProposed) continue;
      for (std::size_t t = 0; t < r.objective_history.size(); ++t) {
        for (std::size_t c = 0; c < r.objective_history[t].size(); ++c) {
          os << r.pilot_length << ',' << r.realization << ',' << t << ',' << c << ','
             << format_double(r.objective_history[t][c]) << ',';
          if (t > 0) os << format_double(r.metric_history[t]);
          os << '\n';
        }
      }
    }
  }
}

void write_se_table_csv(std::ostream& os, const std::vector<ExperimentResult>& sweep) {
  os << "scheme";
  for (const auto& ex : sweep) os << ",tau_" << ex.pilot_length;
  os << "\nbenchmark";
  for (const auto& ex : sweep) os << ',' << format_double(ex.benchmark.mean_se);
  os << "\nproposed";
  for (const auto& ex : sweep) os << ',' << format_double(ex.proposed.mean_se);
  os << "\ngain %";
  for (const auto& ex : sweep) {
    const double gain = ex.benchmark.mean_se > 0.0
                            ? 100.0 * (ex.proposed.mean_se - ex.benchmark.mean_se) / ex.benchmark.mean_se
                            : 0.0;
    os << ',' << format_double(gain);
  }
  os << '\n';
}

}  // namespace pilotopt
