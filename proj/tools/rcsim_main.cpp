// Copyright 2026 the rcsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>
#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "rcsim/harness.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> jobs;
};

void add_common_options(CLI::App* cmd, CliOverrides& overrides) {
  cmd->add_option("--config", overrides.config_path,
                  "Path to the JSON experiment config")
      ->required();
  cmd->add_option("--seed", overrides.seed,
                  "Override the config's master_seed");
  cmd->add_option("--out", overrides.out, "Override the output file path");
  cmd->add_option("--format", overrides.format, "Output format: csv or json");
  cmd->add_option("--jobs", overrides.jobs, "Trajectory-level worker count");
}

rcsim::RunConfig resolve_config(const CliOverrides& overrides) {
  rcsim::RunConfig config = rcsim::load_run_config(overrides.config_path);
  if (overrides.seed) config.master_seed = *overrides.seed;
  if (overrides.out) config.out = *overrides.out;
  if (overrides.format) config.format = *overrides.format;
  if (overrides.jobs) config.jobs = *overrides.jobs;
  if (config.jobs < 1) throw rcsim::ConfigError("config error: jobs must be >= 1");
  if (config.format != "csv" && config.format != "json") {
    throw rcsim::ConfigError("config error: format must be 'csv' or 'json'");
  }
  return config;
}

int dispatch(const CliOverrides& overrides,
             const std::function<rcsim::ExperimentResult(
                 const rcsim::RunConfig&)>& command) {
  try {
    const rcsim::RunConfig config = resolve_config(overrides);
    const rcsim::ExperimentResult result = command(config);
    rcsim::emit(result, config.format, config.out);
    std::cout << "wrote " << config.out << " (" << config.format << ", ";
    switch (result.kind) {
      case rcsim::ExperimentResult::Kind::Sweep:
        std::cout << result.records.size() << " records";
        break;
      case rcsim::ExperimentResult::Kind::Trace:
        std::cout << result.traces.size() << " trace rows";
        break;
      case rcsim::ExperimentResult::Kind::ShadowBench:
        std::cout << result.shadow_records.size() << " calibration rows";
        break;
    }
    std::cout << ")\n";
    return 0;
  } catch (const rcsim::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const rcsim::ResourceLimitError& e) {
    std::cerr << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "rcsim: randomized-compilation simulator for Hamiltonian dynamics"};
  app.require_subcommand(1);

  CliOverrides overrides;
  std::function<rcsim::ExperimentResult(const rcsim::RunConfig&)> command;

  CLI::App* run = app.add_subcommand(
      "run", "Mean fidelity of one (t, n_steps) configuration");
  add_common_options(run, overrides);
  run->callback([&] { command = rcsim::monte_carlo_fidelity; });

  CLI::App* steps = app.add_subcommand(
      "sweep-steps", "Fidelity versus step count at fixed step size");
  add_common_options(steps, overrides);
  steps->callback([&] { command = rcsim::sweep_steps; });

  CLI::App* stepsize = app.add_subcommand(
      "sweep-stepsize", "Fidelity versus step size at fixed total time");
  add_common_options(stepsize, overrides);
  stepsize->callback([&] { command = rcsim::sweep_stepsize; });

  CLI::App* trace = app.add_subcommand(
      "trace-probs", "Per-step adaptive probability trace of one trajectory");
  add_common_options(trace, overrides);
  trace->callback([&] { command = rcsim::trace_probabilities; });

  CLI::App* bench = app.add_subcommand(
      "shadow-bench", "Shadow-estimator calibration and shot scaling");
  add_common_options(bench, overrides);
  bench->callback([&] { command = rcsim::shadow_bench; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Flag and usage problems are config errors for exit-code purposes.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  return dispatch(overrides, command);
}
