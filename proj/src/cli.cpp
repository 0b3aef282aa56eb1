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

#include "pilotopt/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pilotopt/evaluation.hpp"
#include "pilotopt/io.hpp"

#ifndef PILOTOPT_VERSION
#define PILOTOPT_VERSION "0.0.0"
#endif

namespace pilotopt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kBenchmarkStream = 101;
constexpr std::uint64_t kInitStream = 102;
constexpr std::uint64_t kSeStream = 103;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_network_csv(std::ostream& os, const NetworkRealization& net) {
  os << "cell,user,x_km,y_km";
  for (int b = 0; b < net.num_cells; ++b) os << ",large_scale_db_bs" << b;
  os << '\n';
  for (int c = 0; c < net.num_cells; ++c) {
    for (int n = 0; n < net.num_users; ++n) {
      const Point& p = net.user(c, n);
      os << c << ',' << n << ',' << format_double(p.x_km) << ',' << format_double(p.y_km);
      for (int b = 0; b < net.num_cells; ++b) os << ',' << format_double(linear_to_db(net.gains(c, b)(n)));
      os << '\n';
    }
  }
}

void write_manifest(const Invocation& inv) {
  json args = {{"jobs", inv.jobs}};
  if (!inv.figure.empty()) args["figure"] = inv.figure;
  if (!inv.pilots_file.empty()) args["pilots"] = fs::absolute(inv.pilots_file).string();
  const json manifest = {
      {"tool", "pilotopt"},
      {"version", PILOTOPT_VERSION},
      {"command", inv.command},
      {"arguments", args},
      {"master_seed", inv.config.system.rng_seed},
      {"created_utc", utc_now()},
      {"output_dir", fs::absolute(inv.out_dir).string()},
      {"config_source", inv.config_source},
      {"config_yaml", emit_config(inv.config)},
  };
  write_file_atomic(inv.out_dir / "manifest.json",
                    [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });
}

void write_output(const fs::path& dir, const std::string& name, std::ostream& log,
                  const std::function<void(std::ostream&)>& writer) {
  write_file_atomic(dir / name, writer);
  log << "wrote " << (dir / name).string() << '\n';
}

ExperimentResult experiment_at(const Invocation& inv, int tau, bool compute_se) {
  RunConfig rc = inv.config;
  rc.system.pilot_length = tau;
  rc.finalize();
  ExperimentOptions opts;
  opts.compute_se = compute_se;
  opts.jobs = inv.jobs;
  return run_experiment(rc.system, rc.optimizer, opts);
}

void cmd_gen_network(const Invocation& inv, std::ostream& log) {
  const auto seed = realization_seed(inv.config.system.rng_seed, 0);
  const NetworkRealization net = generate_network(inv.config.system, seed);
  write_output(inv.out_dir, "network.csv", log, [&](std::ostream& os) { write_network_csv(os, net); });
}

void cmd_optimize(const Invocation& inv, std::ostream& log) {
  const SystemConfig& sys = inv.config.system;
  const auto seed = realization_seed(sys.rng_seed, 0);
  const NetworkRealization net = generate_network(sys, seed);
  OptimizerParams params = inv.config.optimizer;
  params.init_seed = mix_seed(seed, params.initializer == Initializer::kBenchmark ? kBenchmarkStream
                                                                                 : kInitStream);
  const OptimizationTrace trace = run_algorithm1(net, params, sys);
  log << "status " << to_string(trace.status) << " after " << trace.iterations_used()
      << " iterations\n";
  write_output(inv.out_dir, "pilots.csv", log,
               [&](std::ostream& os) { write_pilots_csv(os, trace.final_pilots()); });
  write_output(inv.out_dir, "trace.csv", log, [&](std::ostream& os) { write_trace_csv(os, trace); });
}

void write_sweep(const Invocation& inv, std::ostream& log, const std::vector<ExperimentResult>& sweep,
                 bool mse, bool power, bool convergence, bool se) {
  write_output(inv.out_dir, "results.csv", log, [&](std::ostream& os) { write_results_csv(os, sweep); });
  if (mse) {
    write_output(inv.out_dir, "cdf_mse.csv", log,
                 [&](std::ostream& os) { write_cdf_mse_csv(os, sweep); });
  }
  if (power) {
    write_output(inv.out_dir, "cdf_power.csv", log,
                 [&](std::ostream& os) { write_cdf_power_csv(os, sweep); });
  }
  if (convergence) {
    write_output(inv.out_dir, "convergence.csv", log,
                 [&](std::ostream& os) { write_convergence_csv(os, sweep); });
  }
  if (se) {
    write_output(inv.out_dir, "se_table.csv", log,
                 [&](std::ostream& os) { write_se_table_csv(os, sweep); });
  }
}

void cmd_evaluate(const Invocation& inv, std::ostream& log) {
  const SystemConfig& sys = inv.config.system;
  if (!inv.pilots_file.empty()) {
    // score a given pilot set on the drop of realization 0
    std::ifstream is(inv.pilots_file);
    if (!is) throw IoError("cannot open '" + inv.pilots_file.string() + "'");
    const PilotSet pilots = read_pilots_csv(is);
    RunConfig rc = inv.config;
    rc.system.pilot_length = pilots.pilot_length();
    rc.finalize();
    const auto seed = realization_seed(sys.rng_seed, 0);
    const NetworkRealization net = generate_network(rc.system, seed);
    SeSettings se;
    se.data_power_mw = sys.data_power_mw;
    se.coherence_length = sys.coherence_length;
    se.num_antennas = sys.num_antennas;
    se.noise_var = sys.noise_variance_mw;
    se.n_draws = sys.se_draws;
    se.seed = mix_seed(seed, kSeStream);
    const auto mse = objective_per_link(pilots, net, sys.noise_variance_mw);
    const auto rate = uplink_se_uatf(pilots, net, se);
    write_output(inv.out_dir, "evaluation.csv", log, [&](std::ostream& os) {
      os << "cell,user,mse_per_link,se_bits_per_hz,pilot_energy_mw\n";
      for (int c = 0; c < net.num_cells; ++c) {
        for (int n = 0; n < net.num_users; ++n) {
          os << c << ',' << n << ',' << format_double(mse[static_cast<std::size_t>(c)]) << ','
             << format_double(rate[static_cast<std::size_t>(c * net.num_users + n)]) << ','
             << format_double(pilots[c].col(n).squaredNorm()) << '\n';
        }
      }
    });
    return;
  }
  const std::vector<ExperimentResult> sweep{experiment_at(inv, sys.pilot_length, true)};
  write_sweep(inv, log, sweep, true, true, true, true);
}

void cmd_reproduce(const Invocation& inv, std::ostream& log) {
  const std::string& fig = inv.figure;
  const bool se = fig == "table1";
  std::vector<ExperimentResult> sweep;
  for (int tau : inv.config.pilot_lengths) {
    log << "tau " << tau << '\n';
    sweep.push_back(experiment_at(inv, tau, se));
  }
  write_sweep(inv, log, sweep, fig == "fig1", fig == "fig2", fig == "fig3", se);
}

}  // namespace

void execute(const Invocation& inv, std::ostream& log) {
  static const std::vector<std::string> commands{"gen-network", "optimize", "evaluate", "reproduce"};
  if (std::find(commands.begin(), commands.end(), inv.command) == commands.end()) {
    throw ConfigError("unknown command '" + inv.command + "'");
  }
  if (inv.command == "reproduce" && inv.figure != "fig1" && inv.figure != "fig2" &&
      inv.figure != "fig3" && inv.figure != "table1") {
    throw ConfigError("unknown figure '" + inv.figure + "' (expected fig1, fig2, fig3 or table1)");
  }
  if (inv.jobs < 1) throw ConfigError("--jobs must be >= 1");
  std::error_code ec;
  fs::create_directories(inv.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + inv.out_dir.string() + "'");
  write_manifest(inv);

  if (inv.command == "gen-network") {
    cmd_gen_network(inv, log);
  } else if (inv.command == "optimize") {
    cmd_optimize(inv, log);
  } else if (inv.command == "evaluate") {
    cmd_evaluate(inv, log);
  } else {
    cmd_reproduce(inv, log);
  }
}

Invocation invocation_from_manifest(const fs::path& manifest_path) {
  json m;
  try {
    m = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw ConfigError(manifest_path.string() + ": not a valid manifest (" + e.what() + ")");
  }
  Invocation inv;
  try {
    inv.command = m.at("command").get<std::string>();
    const json& args = m.at("arguments");
    inv.jobs = args.value("jobs", 1);
    inv.figure = args.value("figure", std::string());
    inv.pilots_file = args.value("pilots", std::string());
    inv.out_dir = m.at("output_dir").get<std::string>();
    inv.config_source = manifest_path.string();
    inv.config = parse_config(m.at("config_yaml").get<std::string>(), manifest_path.string());
  } catch (const json::exception& e) {
    throw ConfigError(manifest_path.string() + ": missing manifest field (" + e.what() + ")");
  }
  return inv;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pilot design for multi-cell Massive MIMO by successive LMI optimization", "pilotopt"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PILOTOPT_VERSION);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  int jobs = 1;
  std::optional<std::string> delta;
  std::optional<std::string> schedule;
  std::optional<std::string> initializer;
  std::optional<int> tau;
  std::string figure;
  std::string pilots;
  std::string manifest;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "YAML configuration file");
    sub->add_option("--seed", seed, "master seed (overrides rng_seed)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--jobs", jobs, "concurrent realizations");
    sub->add_option("--delta", delta, "stopping threshold in sqrt(mW); 'inf' stops after one iteration");
    sub->add_option("--schedule", schedule, "jacobi or gauss-seidel");
    sub->add_option("--initializer", initializer, "random or benchmark");
    sub->add_option("--tau", tau, "pilot length (for reproduce: restricts the sweep)");
  };
  CLI::App* gen = app.add_subcommand("gen-network", "draw one network and write its geometry and gains");
  CLI::App* opt = app.add_subcommand("optimize", "run the successive pilot optimization on one network");
  CLI::App* eval = app.add_subcommand("evaluate", "Monte-Carlo comparison at one pilot length");
  CLI::App* rep = app.add_subcommand("reproduce", "pilot-length sweep for one figure or the SE table");
  CLI::App* rerun = app.add_subcommand("rerun", "re-execute the run recorded in a manifest");
  for (CLI::App* sub : {gen, opt, eval, rep}) common(sub);
  eval->add_option("--pilots", pilots, "score this pilot file instead of running the sweep");
  rep->add_option("figure", figure, "fig1 | fig2 | fig3 | table1")->required();
  rerun->add_option("--manifest", manifest, "manifest.json of the run")->required();
  rerun->add_option("--out", out_dir, "output directory (default: the recorded one)");
  rerun->add_option("--jobs", jobs, "concurrent realizations");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_code::kOk;
  } catch (const CLI::CallForVersion&) {
    out << PILOTOPT_VERSION << '\n';
    return exit_code::kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kConfig;
  }

  try {
    Invocation inv;
    if (rerun->parsed()) {
      inv = invocation_from_manifest(manifest);
      if (rerun->count("--out") > 0) inv.out_dir = out_dir;
      if (rerun->count("--jobs") > 0) inv.jobs = jobs;
    } else {
      CLI::App* sub = app.get_subcommands().front();
      inv.command = sub->get_name();
      inv.figure = figure;
      inv.pilots_file = pilots;
      inv.out_dir = out_dir;
      inv.jobs = jobs;
      if (!config_path.empty()) {
        inv.config = load_config(config_path);
        inv.config_source = config_path;
      } else {
        inv.config.finalize();
        inv.config_source = "<defaults>";
      }
      RunConfig& rc = inv.config;
      if (seed) rc.system.rng_seed = *seed;
      if (delta) {
        try {
          rc.optimizer.delta = std::stod(*delta);
        } catch (const std::exception&) {
          throw ConfigError("--delta: expected a number or 'inf', got '" + *delta + "'");
        }
      }
      if (schedule) rc.optimizer.schedule = parse_schedule(*schedule);
      if (initializer) rc.optimizer.initializer = parse_initializer(*initializer);
      if (tau) {
        rc.system.pilot_length = *tau;
        rc.pilot_lengths = {*tau};
      }
      rc.finalize();
    }
    execute(inv, out);
    return exit_code::kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_code::kConfig;
  } catch (const ContractError& e) {
    err << "invalid argument: " << e.what() << '\n';
    return exit_code::kConfig;
  } catch (const SolverFailure& e) {
    err << "solver error: " << e.what() << '\n';
    return exit_code::kSolver;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return exit_code::kSolver;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return exit_code::kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kFailure;
  }
}

}  // namespace pilotopt
