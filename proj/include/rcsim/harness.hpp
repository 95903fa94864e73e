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

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rcsim/compiler.hpp"
#include "rcsim/models.hpp"

namespace rcsim {

/// Config file or CLI problems; the CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejection by the resource guard; the CLI maps this to exit code 3.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ShadowBenchConfig {
  int calibration_shots = 50000;
  int mom_batches = 10;
  std::vector<int> shots_grid = {1250, 2500, 5000, 10000, 20000, 40000};
  int repeats = 48;
};

/// Fully resolved experiment configuration. Every field except model and
/// strategy has a default.
struct RunConfig {
  ModelSpec model;
  SamplingStrategy strategy;
  double t = 1.0;
  int n_steps = 50;
  double step_size = 0.02;                    // sweep-steps: fixed step size
  std::vector<int> step_counts = {10, 20, 30, 40, 50};
  std::vector<double> step_sizes = {0.01, 0.02, 0.03, 0.04, 0.05};
  long n_samples = 10000;
  std::uint64_t master_seed = 20260808;
  bool record_traces = false;
  double max_cost = 4e12;  // budget on total_dim^2 * steps * samples
  int jobs = 1;
  std::string out = "result.csv";
  std::string format = "csv";  // csv | json
  ShadowBenchConfig shadow_bench;
};

/// Parses a config document. Unknown keys and malformed values raise
/// ConfigError. The schema is documented in the README.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

/// Serializes the experiment-defining fields (excluding jobs and output
/// destination) in a fixed key order, as echoed into result metadata.
nlohmann::ordered_json config_to_json(const RunConfig& config);

struct SweepRecord {
  double abscissa = 0.0;
  double mean_fidelity = 0.0;
  double std_error = 0.0;
  long n_samples = 0;
  std::string strategy;
  std::string model_tag;
  std::uint64_t seed = 0;
};

struct TraceRecord {
  int step = 0;
  double tau = 0.0;
  int sampled_index = 0;
  std::vector<double> probs;
};

struct ShadowBenchRecord {
  int n_shots = 0;
  std::string term;
  double exact_dev = 0.0;
  double mean_est_dev = 0.0;
  double se_est_dev = 0.0;
  int repeats = 0;
  std::uint64_t seed = 0;
};

/// Result of one harness command: exactly one of the three record vectors is
/// populated, matching the kind tag.
struct ExperimentResult {
  enum class Kind { Sweep, Trace, ShadowBench };
  Kind kind = Kind::Sweep;
  std::vector<SweepRecord> records;
  std::vector<TraceRecord> traces;
  std::vector<ShadowBenchRecord> shadow_records;
  nlohmann::ordered_json metadata;
};

/// Mean fidelity and standard error over config.n_samples seeded
/// trajectories at (t, n_steps). Trajectory seeds derive from master_seed by
/// index, so results are independent of the worker count.
ExperimentResult monte_carlo_fidelity(const RunConfig& config);

/// Fidelity versus step count at fixed step size (t grows with N).
ExperimentResult sweep_steps(const RunConfig& config);

/// Fidelity versus step size at fixed total time (N = round(t / step)).
ExperimentResult sweep_stepsize(const RunConfig& config);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_se = 0.0;
};

/// Ordinary least-squares line through (step, fidelity) points; the
/// intercept estimates the zero-step-size limit. Needs >= 2 distinct
/// abscissae. The intercept standard error comes from the fit residuals.
LinearFit extrapolate_zero_step(
    const std::vector<std::pair<double, double>>& points);

/// Per-step probability trace of a single seeded adaptive trajectory.
/// Rejects fixed strategies (their traces are constant).
ExperimentResult trace_probabilities(const RunConfig& config);

/// Shadow-estimator calibration: per-term deviation estimates at the
/// calibration budget plus repeated-run standard errors over a shot grid,
/// with the 1/sqrt(n_shots) scaling slope in the metadata.
ExperimentResult shadow_bench(const RunConfig& config);

/// JSON document with the metadata block and one record object per CSV row.
nlohmann::ordered_json result_to_json(const ExperimentResult& result);

/// Writes the result as CSV or JSON ("csv" | "json"). Identical result
/// content produces byte-identical files.
void emit(const ExperimentResult& result, const std::string& format,
          const std::string& path);

}  // namespace rcsim
