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

#include "pilotopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "pilotopt/conic.hpp"
#include "pilotopt/io.hpp"

namespace pilotopt {

std::string_view to_string(UpdateSchedule s) {
  return s == UpdateSchedule::kJacobi ? "jacobi" : "gauss-seidel";
}

std::string_view to_string(Initializer i) {
  return i == Initializer::kBenchmark ? "benchmark" : "random";
}

std::string_view to_string(TraceStatus s) {
  return s == TraceStatus::kConverged ? "converged" : "max-iterations";
}

UpdateSchedule parse_schedule(std::string_view text) {
  if (text == "jacobi") return UpdateSchedule::kJacobi;
  if (text == "gauss-seidel") return UpdateSchedule::kGaussSeidel;
  throw ConfigError("unknown update schedule '" + std::string(text) +
                    "' (expected jacobi or gauss-seidel)");
}

Initializer parse_initializer(std::string_view text) {
  if (text == "benchmark") return Initializer::kBenchmark;
  if (text == "random") return Initializer::kRandom;
  throw ConfigError("unknown initializer '" + std::string(text) +
                    "' (expected benchmark or random)");
}

void OptimizerParams::validate() const {
  if (!(delta >= 0.0)) throw ConfigError("delta must be >= 0");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(eps_solver > 0.0 && eps_solver < 1.0)) throw ConfigError("eps_solver must lie in (0, 1)");
}

namespace {

std::string failure_message(int cell, int iteration, SolverStatus status, const std::string& detail,
                            int realization) {
  std::string msg = "subproblem solve failed";
  if (realization >= 0) msg += " in realization " + std::to_string(realization);
  msg += " at iteration " + std::to_string(iteration) + ", cell " + std::to_string(cell) + ": " +
         std::string(to_string(status));
  if (!detail.empty()) msg += " (" + detail + ")";
  return msg;
}

}  // namespace

SolverFailure::SolverFailure(int cell_, int iteration_, SolverStatus status_, std::string detail_,
                             int realization_)
    : std::runtime_error(failure_message(cell_, iteration_, status_, detail_, realization_)),
      cell(cell_),
      iteration(iteration_),
      status(status_),
      detail(std::move(detail_)),
      realization(realization_) {}

PilotSet benchmark_pilots(int pilot_length, int num_users, int num_cells,
                          double per_symbol_power_mw, std::uint64_t seed) {
  if (pilot_length < 1 || num_users < 1 || num_cells < 1) {
    throw ContractError("benchmark_pilots: dimensions must be positive");
  }
  if (!(per_symbol_power_mw >= 0.0)) throw ContractError("benchmark_pilots: negative power");
  const int tau = pilot_length;
  constexpr int kAttempts = 16;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    Rng rng(attempt == 0 ? seed : mix_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    MatrixXd u(tau, tau);
    for (int j = 0; j < tau; ++j) {
      for (int i = 0; i < tau; ++i) u(i, j) = unif(rng);
    }
    Eigen::EigenSolver<MatrixXd> eig(u, true);
    if (eig.info() != Eigen::Success) continue;
    const MatrixXcd vecs = eig.eigenvectors();
    Eigen::HouseholderQR<MatrixXcd> qr(vecs);
    const MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    double min_pivot = std::numeric_limits<double>::infinity();
    for (int i = 0; i < tau; ++i) min_pivot = std::min(min_pivot, std::abs(r(i, i)));
    if (!(min_pivot > 1e-8)) continue;
    const MatrixXcd q = qr.householderQ() * MatrixXcd::Identity(tau, tau);
    const double scale = std::sqrt(per_symbol_power_mw * tau);
    MatrixXcd x(tau, num_users);
    for (int n = 0; n < num_users; ++n) x.col(n) = scale * q.col(n % tau);
    PilotSet out;
    out.pilots.assign(static_cast<std::size_t>(num_cells), x);
    return out;
  }
  throw NumericalError("benchmark_pilots: eigenvector basis degenerate in every attempt");
}

PilotSet random_pilots(int pilot_length, int num_users, int num_cells, double p_max,
                       std::uint64_t seed) {
  if (pilot_length < 1 || num_users < 1 || num_cells < 1) {
    throw ContractError("random_pilots: dimensions must be positive");
  }
  if (!(p_max >= 0.0)) throw ContractError("random_pilots: negative power budget");
  PilotSet out;
  for (int c = 0; c < num_cells; ++c) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
    const MatrixXcd g = complex_normal_matrix(rng, pilot_length, num_users);
    Eigen::JacobiSVD<MatrixXcd> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.pilots.push_back(std::sqrt(p_max) * svd.matrixU() * svd.matrixV().adjoint());
  }
  return out;
}

PilotSet initial_pilots(const OptimizerParams& params, const SystemConfig& config) {
  if (params.initializer == Initializer::kBenchmark) {
    return benchmark_pilots(config.pilot_length, config.num_users, config.num_cells,
                            config.per_symbol_power_mw, params.init_seed);
  }
  return random_pilots(config.pilot_length, config.num_users, config.num_cells,
                       config.pilot_power_budget(), params.init_seed);
}

double convergence_metric(const PilotSet& current, const PilotSet& previous) {
  current.check_shape();
  previous.check_shape();
  if (current.num_cells() != previous.num_cells() ||
      current.pilot_length() != previous.pilot_length() ||
      current.num_users() != previous.num_users()) {
    throw ContractError("convergence_metric: pilot sets differ in shape");
  }
  double sum = 0.0;
  for (int c = 0; c < current.num_cells(); ++c) sum += (current[c] - previous[c]).norm();
  return sum;
}

std::vector<double> objective_per_link(const PilotSet& pilots, const NetworkRealization& net,
                                       double noise_var) {
  // f is linear in M, so evaluating with M = 1 gives f / M directly
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(net.num_cells));
  for (int c = 0; c < net.num_cells; ++c) {
    out.push_back(mse_woodbury(pilots, net, c, 1, noise_var) / net.num_users);
  }
  return out;
}

namespace {

struct CellUpdate {
  MatrixXcd pilot;
  double surrogate = 0.0;
  int solver_iterations = 0;
};

CellUpdate update_cell(int cell, const PilotSet& previous, const NetworkRealization& net,
                       double p_max, double noise_var, double eps_solver, int iteration) {
  const ConicProgram prog = build_subproblem(cell, previous, net, p_max, noise_var);
  const SolverReport rep = solve(prog, eps_solver);
  if (!rep.ok()) {
    std::ostringstream detail;
    detail << "relative gap " << rep.relative_gap << ", primal infeasibility "
           << rep.primal_infeasibility << ", dual infeasibility " << rep.dual_infeasibility;
    throw SolverFailure(cell, iteration, rep.status, detail.str());
  }
  CellUpdate out;
  out.pilot = rep.pilot;
  out.surrogate = rep.objective;
  out.solver_iterations = rep.iterations;
  // pull round-off overshoot of the power limit back onto the boundary
  const MatrixXcd gram = out.pilot.adjoint() * out.pilot;
  const double lmax = Eigen::SelfAdjointEigenSolver<MatrixXcd>(gram, Eigen::EigenvaluesOnly)
                          .eigenvalues()
                          .maxCoeff();
  if (lmax > p_max) out.pilot *= std::sqrt(p_max / lmax);
  return out;
}

}  // namespace

OptimizationTrace run_algorithm1(const NetworkRealization& net, const OptimizerParams& params,
                                 const SystemConfig& config) {
  return run_algorithm1(net, params, config, initial_pilots(params, config));
}

OptimizationTrace run_algorithm1(const NetworkRealization& net, const OptimizerParams& params,
                                 const SystemConfig& config, const PilotSet& start) {
  params.validate();
  start.check_shape();
  if (start.num_cells() != net.num_cells || start.num_users() != net.num_users) {
    throw ContractError("run_algorithm1: starting pilots do not match the network");
  }
  const double p_max = config.pilot_power_budget();
  const double noise_var = noise_variance_mw(config);
  const int num_cells = net.num_cells;

  OptimizationTrace trace;
  trace.initial = start;
  trace.initial_objective_per_link = objective_per_link(start, net, noise_var);

  PilotSet previous = start;
  for (int t = 1; t <= params.max_iterations; ++t) {
    IterationRecord rec;
    rec.iteration = t;
    rec.pilots = previous;
    rec.surrogate.resize(static_cast<std::size_t>(num_cells));
    rec.solver_iterations.resize(static_cast<std::size_t>(num_cells));
    for (int c = 0; c < num_cells; ++c) {
      // Jacobi reads only iteration t-1; Gauss-Seidel sees peers already updated
      const PilotSet& basis = params.schedule == UpdateSchedule::kJacobi ? previous : rec.pilots;
      CellUpdate u = update_cell(c, basis, net, p_max, noise_var, params.eps_solver, t);
      rec.pilots[c] = std::move(u.pilot);
      rec.surrogate[static_cast<std::size_t>(c)] = u.surrogate;
      rec.solver_iterations[static_cast<std::size_t>(c)] = u.solver_iterations;
    }
    rec.objective_per_link = objective_per_link(rec.pilots, net, noise_var);
    rec.metric = convergence_metric(rec.pilots, previous);
    previous = rec.pilots;
    const bool done = rec.metric <= params.delta;
    trace.iterations.push_back(std::move(rec));
    if (done) {
      trace.status = TraceStatus::kConverged;
      break;
    }
  }
  return trace;
}

void write_trace_csv(std::ostream& os, const OptimizationTrace& trace) {
  os << "iteration,cell,objective_per_link,convergence_metric\n";
  for (const IterationRecord& rec : trace.iterations) {
    for (std::size_t c = 0; c < rec.objective_per_link.size(); ++c) {
      os << rec.iteration << ',' << c << ',' << format_double(rec.objective_per_link[c]) << ','
         << format_double(rec.metric) << '\n';
    }
  }
}

void write_pilots_csv(std::ostream& os, const PilotSet& pilots) {
  pilots.check_shape();
  const int tau = pilots.pilot_length();
  const int n = pilots.num_users();
  os << "# tau=" << tau << " users=" << n << " cells=" << pilots.num_cells()
     << " units=sqrt_mW\n";
  os << "cell,symbol";
  for (int u = 0; u < n; ++u) os << ",re_" << u << ",im_" << u;
  os << '\n';
  for (int c = 0; c < pilots.num_cells(); ++c) {
    for (int i = 0; i < tau; ++i) {
      os << c << ',' << i;
      for (int u = 0; u < n; ++u) {
        os << ',' << format_double(pilots[c](i, u).real()) << ','
           << format_double(pilots[c](i, u).imag());
      }
      os << '\n';
    }
  }
}

PilotSet read_pilots_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# tau=", 0) != 0) {
    throw ConfigError("pilot file: missing '# tau=' header");
  }
  int tau = 0;
  int n = 0;
  int cells = 0;
  if (std::sscanf(line.c_str(), "# tau=%d users=%d cells=%d", &tau, &n, &cells) != 3 || tau < 1 ||
      n < 1 || cells < 1) {
    throw ConfigError("pilot file: malformed header '" + line + "'");
  }
  std::getline(is, line);  // column names
  PilotSet out = PilotSet::zeros(cells, tau, n);
  for (int row = 0; row < cells * tau; ++row) {
    if (!std::getline(is, line)) throw ConfigError("pilot file: truncated");
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != 2 + 2 * n) {
      throw ConfigError("pilot file: wrong number of fields in row " + std::to_string(row));
    }
    const int c = std::stoi(fields[0]);
    const int i = std::stoi(fields[1]);
    if (c < 0 || c >= cells || i < 0 || i >= tau) throw ConfigError("pilot file: index out of range");
    for (int u = 0; u < n; ++u) {
      out[c](i, u) = cplx(std::stod(fields[2 + 2 * u]), std::stod(fields[3 + 2 * u]));
    }
  }
  return out;
}

}  // namespace pilotopt
