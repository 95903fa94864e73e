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

#include "rcsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace rcsim {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kVersion = "rcsim 0.1.0";

// --- config parsing helpers -------------------------------------------------

[[noreturn]] void config_fail(const std::string& message) {
  throw ConfigError("config error: " + message);
}

void check_keys(const json& obj, const std::string& context,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return key == k;
        }) == allowed.end()) {
      config_fail("unknown key '" + key + "' in " + context);
    }
  }
}

double get_number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) config_fail(std::string(key) + " must be a number");
  return obj[key].get<double>();
}

long get_integer(const json& obj, const char* key, long fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) {
    config_fail(std::string(key) + " must be an integer");
  }
  return obj[key].get<long>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) config_fail(std::string(key) + " must be a bool");
  return obj[key].get<bool>();
}

std::string get_string(const json& obj, const char* key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) config_fail(std::string(key) + " must be a string");
  return obj[key].get<std::string>();
}

InitialStateSpec parse_initial_state(const json& obj) {
  check_keys(obj, "initial_state", {"kind", "bits", "levels"});
  const std::string kind = get_string(obj, "kind", "");
  if (kind == "bitstring") {
    if (!obj.contains("bits")) config_fail("initial_state.bits is required");
    return BitstringState{get_string(obj, "bits", "")};
  }
  if (kind == "fock") {
    if (!obj.contains("levels") || !obj["levels"].is_array()) {
      config_fail("initial_state.levels must be an array of Fock levels");
    }
    FockLevelsState s;
    for (const auto& v : obj["levels"]) s.levels.push_back(v.get<int>());
    return s;
  }
  if (kind == "fock_qubit") {
    if (!obj.contains("levels") || !obj["levels"].is_array()) {
      config_fail("initial_state.levels must be an array of [n, s] pairs");
    }
    FockQubitState s;
    for (const auto& v : obj["levels"]) {
      if (!v.is_array() || v.size() != 2) {
        config_fail("initial_state.levels entries must be [n, s] pairs");
      }
      s.levels.emplace_back(v[0].get<int>(), v[1].get<int>());
    }
    return s;
  }
  config_fail("initial_state.kind must be bitstring, fock or fock_qubit");
}

ModelSpec parse_model(const json& obj) {
  if (!obj.is_object()) config_fail("model must be an object");
  const std::string kind = get_string(obj, "kind", "");
  ModelSpec spec;
  if (kind == "mfim") {
    check_keys(obj, "model", {"kind", "chain_length", "J", "h_x", "h_z",
                              "boundary", "initial_state"});
    MfimParams p;
    p.chain_length = static_cast<int>(get_integer(obj, "chain_length", 4));
    p.coupling_j = get_number(obj, "J", 1.0);
    p.h_x = get_number(obj, "h_x", 0.5);
    p.h_z = get_number(obj, "h_z", 0.3);
    const std::string boundary = get_string(obj, "boundary", "periodic");
    if (boundary == "periodic") {
      p.boundary = Boundary::Periodic;
    } else if (boundary == "open") {
      p.boundary = Boundary::Open;
    } else {
      config_fail("model.boundary must be 'periodic' or 'open'");
    }
    spec.params = p;
  } else if (kind == "kerr") {
    check_keys(obj, "model",
               {"kind", "detuning", "kerr", "drive", "fock_dim",
                "initial_state"});
    KerrParams p;
    p.detuning = get_number(obj, "detuning", 0.3);
    p.kerr = get_number(obj, "kerr", 1.0);
    p.drive = get_number(obj, "drive", 0.5);
    p.fock_dim = static_cast<int>(get_integer(obj, "fock_dim", 50));
    spec.params = p;
  } else if (kind == "rabi") {
    check_keys(obj, "model",
               {"kind", "omega", "qubit_omega", "coupling", "fock_dim",
                "initial_state"});
    RabiParams p;
    p.field_freq = get_number(obj, "omega", 1.0);
    p.qubit_freq = get_number(obj, "qubit_omega", 1.0);
    p.coupling = get_number(obj, "coupling", 0.2);
    p.fock_dim = static_cast<int>(get_integer(obj, "fock_dim", 50));
    spec.params = p;
  } else {
    config_fail("model.kind must be mfim, kerr or rabi");
  }
  if (obj.contains("initial_state")) {
    spec.initial_state = parse_initial_state(obj["initial_state"]);
  }
  return spec;
}

SamplingStrategy parse_strategy(const json& obj) {
  if (!obj.is_object()) config_fail("strategy must be an object");
  check_keys(obj, "strategy",
             {"kind", "moment_source", "delta_var", "shadows"});
  SamplingStrategy strategy;
  const std::string kind = get_string(obj, "kind", "");
  if (kind == "fixed-qdrift") {
    strategy.kind = StrategyKind::FixedQDrift;
  } else if (kind == "equal") {
    strategy.kind = StrategyKind::EqualWeight;
  } else if (kind == "hard-truncation") {
    strategy.kind = StrategyKind::HardTruncation;
  } else if (kind == "adaptive") {
    strategy.kind = StrategyKind::FluctuationAdaptive;
  } else {
    config_fail(
        "strategy.kind must be fixed-qdrift, equal, hard-truncation or "
        "adaptive");
  }
  const std::string source = get_string(obj, "moment_source", "exact");
  if (source == "exact") {
    strategy.moment_source = MomentSource::Exact;
  } else if (source == "shadows") {
    strategy.moment_source = MomentSource::Shadows;
  } else {
    config_fail("strategy.moment_source must be 'exact' or 'shadows'");
  }
  strategy.delta_var = get_number(obj, "delta_var", 1e-12);
  if (strategy.delta_var < 0.0) config_fail("strategy.delta_var must be >= 0");
  if (obj.contains("shadows")) {
    const json& sh = obj["shadows"];
    check_keys(sh, "strategy.shadows", {"n_shots", "mom_batches"});
    strategy.shadow_config.n_shots =
        static_cast<int>(get_integer(sh, "n_shots", 10000));
    strategy.shadow_config.mom_batches =
        static_cast<int>(get_integer(sh, "mom_batches", 10));
  }
  if (strategy.shadow_config.n_shots <= 0 ||
      strategy.shadow_config.mom_batches <= 0 ||
      strategy.shadow_config.n_shots % strategy.shadow_config.mom_batches !=
          0) {
    config_fail("strategy.shadows: mom_batches must divide n_shots");
  }
  return strategy;
}

ShadowBenchConfig parse_shadow_bench(const json& obj) {
  check_keys(obj, "shadow_bench",
             {"calibration_shots", "mom_batches", "shots_grid", "repeats"});
  ShadowBenchConfig bench;
  bench.calibration_shots =
      static_cast<int>(get_integer(obj, "calibration_shots", 50000));
  bench.mom_batches = static_cast<int>(get_integer(obj, "mom_batches", 10));
  bench.repeats = static_cast<int>(get_integer(obj, "repeats", 48));
  if (obj.contains("shots_grid")) {
    if (!obj["shots_grid"].is_array()) {
      config_fail("shadow_bench.shots_grid must be an array");
    }
    bench.shots_grid.clear();
    for (const auto& v : obj["shots_grid"]) {
      bench.shots_grid.push_back(v.get<int>());
    }
  }
  if (bench.calibration_shots <= 0 || bench.mom_batches <= 0 ||
      bench.repeats < 2 || bench.shots_grid.size() < 2) {
    config_fail(
        "shadow_bench needs positive budgets, >= 2 repeats and >= 2 grid "
        "points");
  }
  for (int n : bench.shots_grid) {
    if (n <= 0 || n % bench.mom_batches != 0) {
      config_fail("shadow_bench.shots_grid entries must be positive multiples "
                  "of mom_batches");
    }
  }
  if (bench.calibration_shots % bench.mom_batches != 0) {
    config_fail("shadow_bench.calibration_shots must be a multiple of "
                "mom_batches");
  }
  return bench;
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object()) config_fail("top-level document must be an object");
  check_keys(doc, "config",
             {"model", "strategy", "t", "n_steps", "step_size", "step_counts",
              "step_sizes", "n_samples", "master_seed", "record_traces",
              "max_cost", "jobs", "out", "format", "shadow_bench"});
  if (!doc.contains("model")) config_fail("'model' is required");
  if (!doc.contains("strategy")) config_fail("'strategy' is required");

  RunConfig config;
  config.model = parse_model(doc["model"]);
  config.strategy = parse_strategy(doc["strategy"]);
  config.t = get_number(doc, "t", 1.0);
  config.n_steps = static_cast<int>(get_integer(doc, "n_steps", 50));
  config.step_size = get_number(doc, "step_size", 0.02);
  config.n_samples = get_integer(doc, "n_samples", 10000);
  if (doc.contains("master_seed")) {
    if (!doc["master_seed"].is_number_integer()) {
      config_fail("master_seed must be an integer");
    }
    config.master_seed = doc["master_seed"].get<std::uint64_t>();
  }
  config.record_traces = get_bool(doc, "record_traces", false);
  config.max_cost = get_number(doc, "max_cost", config.max_cost);
  config.jobs = static_cast<int>(get_integer(doc, "jobs", 1));
  config.out = get_string(doc, "out", config.out);
  config.format = get_string(doc, "format", config.format);
  if (doc.contains("step_counts")) {
    if (!doc["step_counts"].is_array()) config_fail("step_counts: array");
    config.step_counts.clear();
    for (const auto& v : doc["step_counts"]) {
      config.step_counts.push_back(v.get<int>());
    }
  }
  if (doc.contains("step_sizes")) {
    if (!doc["step_sizes"].is_array()) config_fail("step_sizes: array");
    config.step_sizes.clear();
    for (const auto& v : doc["step_sizes"]) {
      config.step_sizes.push_back(v.get<double>());
    }
  }
  if (doc.contains("shadow_bench")) {
    config.shadow_bench = parse_shadow_bench(doc["shadow_bench"]);
  }

  if (!(config.t > 0.0)) config_fail("t must be > 0");
  if (config.n_steps < 1) config_fail("n_steps must be >= 1");
  if (config.n_samples < 1) config_fail("n_samples must be >= 1");
  if (!(config.step_size > 0.0)) config_fail("step_size must be > 0");
  if (config.jobs < 1) config_fail("jobs must be >= 1");
  if (config.format != "csv" && config.format != "json") {
    config_fail("format must be 'csv' or 'json'");
  }
  for (int n : config.step_counts) {
    if (n < 1) config_fail("step_counts entries must be >= 1");
  }
  for (double s : config.step_sizes) {
    if (!(s > 0.0)) config_fail("step_sizes entries must be > 0");
  }
  if (config.step_counts.empty()) config_fail("step_counts must be non-empty");
  if (config.step_sizes.empty()) config_fail("step_sizes must be non-empty");
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_fail("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    config_fail("invalid JSON in " + path + ": " + e.what());
  }
  return parse_run_config(doc);
}

ordered_json config_to_json(const RunConfig& config) {
  ordered_json model;
  if (const auto* m = std::get_if<MfimParams>(&config.model.params)) {
    model["kind"] = "mfim";
    model["chain_length"] = m->chain_length;
    model["J"] = m->coupling_j;
    model["h_x"] = m->h_x;
    model["h_z"] = m->h_z;
    model["boundary"] = m->boundary == Boundary::Periodic ? "periodic" : "open";
  } else if (const auto* k = std::get_if<KerrParams>(&config.model.params)) {
    model["kind"] = "kerr";
    model["detuning"] = k->detuning;
    model["kerr"] = k->kerr;
    model["drive"] = k->drive;
    model["fock_dim"] = k->fock_dim;
  } else {
    const auto& r = std::get<RabiParams>(config.model.params);
    model["kind"] = "rabi";
    model["omega"] = r.field_freq;
    model["qubit_omega"] = r.qubit_freq;
    model["coupling"] = r.coupling;
    model["fock_dim"] = r.fock_dim;
  }
  if (config.model.initial_state) {
    ordered_json init;
    if (const auto* b = std::get_if<BitstringState>(&*config.model.initial_state)) {
      init["kind"] = "bitstring";
      init["bits"] = b->bits;
    } else if (const auto* f =
                   std::get_if<FockLevelsState>(&*config.model.initial_state)) {
      init["kind"] = "fock";
      init["levels"] = f->levels;
    } else {
      const auto& fq = std::get<FockQubitState>(*config.model.initial_state);
      init["kind"] = "fock_qubit";
      auto& levels = init["levels"] = ordered_json::array();
      for (const auto& [n, s] : fq.levels) levels.push_back({n, s});
    }
    model["initial_state"] = std::move(init);
  }

  ordered_json strategy;
  strategy["kind"] = [&] {
    switch (config.strategy.kind) {
      case StrategyKind::FixedQDrift: return "fixed-qdrift";
      case StrategyKind::EqualWeight: return "equal";
      case StrategyKind::HardTruncation: return "hard-truncation";
      case StrategyKind::FluctuationAdaptive: return "adaptive";
    }
    return "";
  }();
  if (config.strategy.is_adaptive()) {
    strategy["moment_source"] =
        config.strategy.moment_source == MomentSource::Exact ? "exact"
                                                             : "shadows";
    strategy["delta_var"] = config.strategy.delta_var;
    if (config.strategy.moment_source == MomentSource::Shadows) {
      strategy["shadows"] = {
          {"n_shots", config.strategy.shadow_config.n_shots},
          {"mom_batches", config.strategy.shadow_config.mom_batches}};
    }
  }

  ordered_json out;
  out["model"] = std::move(model);
  out["strategy"] = std::move(strategy);
  out["t"] = config.t;
  out["n_steps"] = config.n_steps;
  out["step_size"] = config.step_size;
  out["step_counts"] = config.step_counts;
  out["step_sizes"] = config.step_sizes;
  out["n_samples"] = config.n_samples;
  out["master_seed"] = config.master_seed;
  out["record_traces"] = config.record_traces;
  out["max_cost"] = config.max_cost;
  out["shadow_bench"] = {
      {"calibration_shots", config.shadow_bench.calibration_shots},
      {"mom_batches", config.shadow_bench.mom_batches},
      {"shots_grid", config.shadow_bench.shots_grid},
      {"repeats", config.shadow_bench.repeats}};
  return out;
}

namespace {

// --- execution --------------------------------------------------------------

void check_budget(const RunConfig& config, double cost) {
  if (cost > config.max_cost) {
    std::ostringstream msg;
    msg << "resource guard: estimated cost " << cost
        << " (total_dim^2 * steps * samples) exceeds the configured budget "
        << config.max_cost << "; raise max_cost to proceed";
    throw ResourceLimitError(msg.str());
  }
}

struct PointStats {
  double mean = 0.0;
  double std_error = 0.0;
  long n_samples = 0;
  CompilerDiagnostics diagnostics;
  bool degenerate = false;
};

// Strategy constraints that depend on the built model are config errors,
// and must be raised before any trajectory workers start.
void check_strategy_against_model(const RunConfig& config,
                                  const HamiltonianTermSet& terms) {
  if (config.strategy.is_adaptive() &&
      config.strategy.moment_source == MomentSource::Shadows &&
      !terms.space().all_qubits()) {
    throw ConfigError(
        "config error: shadow moment estimation requires a qubit model; use "
        "exact moments for bosonic or hybrid models");
  }
  if (config.strategy.uses_weights()) {
    for (const Term& term : terms.terms()) {
      if (!term.weight_h.has_value()) {
        throw ConfigError("config error: term '" + term.label +
                          "' carries no weight under a weight-based strategy");
      }
    }
  }
}

/// Runs n_samples independent trajectories. Trajectory i draws its stream
/// from derive_seed(point_seed, i); fidelities are reduced in index order so
/// the result does not depend on the worker count.
PointStats run_point(const HamiltonianTermSet& terms, const StateVector& psi0,
                     double t, int n_steps, const SamplingStrategy& strategy,
                     long n_samples, std::uint64_t point_seed, int jobs) {
  std::vector<double> fidelities(static_cast<size_t>(n_samples), 0.0);
  CompilerDiagnostics merged;
  std::mutex merge_mutex;
  std::atomic<long> next{0};
  std::exception_ptr worker_error;

  auto worker = [&]() {
    CompilerDiagnostics local;
    try {
      for (;;) {
        const long i = next.fetch_add(1);
        if (i >= n_samples) break;
        Rng rng(derive_seed(point_seed, static_cast<std::uint64_t>(i)));
        TrajectoryOptions options;
        options.seed = derive_seed(point_seed, static_cast<std::uint64_t>(i));
        const TrajectoryResult result =
            run_trajectory(terms, psi0, t, n_steps, strategy, rng, options);
        fidelities[static_cast<size_t>(i)] = result.fidelity;
        local.negative_variance_clamps +=
            result.diagnostics.negative_variance_clamps;
        local.max_tau = std::max(local.max_tau, result.diagnostics.max_tau);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(merge_mutex);
      if (!worker_error) worker_error = std::current_exception();
      next.store(n_samples);  // drain remaining work
      return;
    }
    std::lock_guard<std::mutex> lock(merge_mutex);
    merged.negative_variance_clamps += local.negative_variance_clamps;
    merged.max_tau = std::max(merged.max_tau, local.max_tau);
  };

  const int n_workers =
      static_cast<int>(std::min<long>(std::max(jobs, 1), n_samples));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (worker_error) std::rethrow_exception(worker_error);

  double sum = 0.0;
  for (double f : fidelities) sum += f;
  const double mean = sum / static_cast<double>(n_samples);
  double ss = 0.0;
  for (double f : fidelities) ss += (f - mean) * (f - mean);

  PointStats stats;
  stats.mean = mean;
  stats.n_samples = n_samples;
  stats.diagnostics = merged;
  if (n_samples >= 2) {
    const double sample_var = ss / static_cast<double>(n_samples - 1);
    stats.std_error = std::sqrt(sample_var / static_cast<double>(n_samples));
  } else {
    stats.std_error = 0.0;
    stats.degenerate = true;
  }
  return stats;
}

ordered_json base_metadata(const RunConfig& config, const char* command,
                           const char* abscissa) {
  ordered_json meta;
  meta["version"] = kVersion;
  meta["command"] = command;
  meta["abscissa"] = abscissa;
  meta["master_seed"] = config.master_seed;
  meta["model_tag"] = model_tag(config.model);
  if (std::holds_alternative<RabiParams>(config.model.params)) {
    meta["index_convention"] = "boson-major: |n,s> flattens to 2n+s";
  } else if (std::holds_alternative<MfimParams>(config.model.params)) {
    meta["index_convention"] = "bitstring: qubit 0 is the most significant bit";
  } else {
    meta["index_convention"] = "fock: index n is the occupation number";
  }
  meta["config"] = config_to_json(config);
  return meta;
}

void attach_diagnostics(ordered_json& meta, const CompilerDiagnostics& diag,
                        bool degenerate) {
  meta["max_tau"] = diag.max_tau;
  meta["warnings"] = {
      {"negative_variance_clamps", diag.negative_variance_clamps},
      {"degenerate_samples", degenerate}};
}

}  // namespace

ExperimentResult monte_carlo_fidelity(const RunConfig& config) {
  const HamiltonianTermSet terms = build_model(config.model);
  const StateVector psi0 = initial_state(config.model);
  check_strategy_against_model(config, terms);
  const double dim = terms.space().total_dim();
  check_budget(config, dim * dim * config.n_steps *
                           static_cast<double>(config.n_samples));

  const PointStats stats =
      run_point(terms, psi0, config.t, config.n_steps, config.strategy,
                config.n_samples, config.master_seed, config.jobs);

  ExperimentResult result;
  result.kind = ExperimentResult::Kind::Sweep;
  result.records.push_back(SweepRecord{
      static_cast<double>(config.n_steps), stats.mean, stats.std_error,
      stats.n_samples, strategy_tag(config.strategy), model_tag(config.model),
      config.master_seed});
  result.metadata = base_metadata(config, "run", "n_steps");
  result.metadata["t"] = config.t;
  attach_diagnostics(result.metadata, stats.diagnostics, stats.degenerate);
  return result;
}

ExperimentResult sweep_steps(const RunConfig& config) {
  std::vector<int> counts = config.step_counts;
  std::sort(counts.begin(), counts.end());

  const HamiltonianTermSet terms = build_model(config.model);
  const StateVector psi0 = initial_state(config.model);
  check_strategy_against_model(config, terms);
  const double dim = terms.space().total_dim();
  double cost = 0.0;
  for (int n : counts) {
    cost += dim * dim * n * static_cast<double>(config.n_samples);
  }
  check_budget(config, cost);

  ExperimentResult result;
  result.kind = ExperimentResult::Kind::Sweep;
  result.metadata = base_metadata(config, "sweep-steps", "n_steps");
  result.metadata["step_size"] = config.step_size;

  CompilerDiagnostics diag;
  bool degenerate = false;
  for (size_t k = 0; k < counts.size(); ++k) {
    const int n_steps = counts[k];
    const double t = config.step_size * n_steps;
    const PointStats stats = run_point(
        terms, psi0, t, n_steps, config.strategy, config.n_samples,
        derive_seed(config.master_seed, static_cast<std::uint64_t>(k)),
        config.jobs);
    result.records.push_back(SweepRecord{
        static_cast<double>(n_steps), stats.mean, stats.std_error,
        stats.n_samples, strategy_tag(config.strategy),
        model_tag(config.model), config.master_seed});
    diag.negative_variance_clamps += stats.diagnostics.negative_variance_clamps;
    diag.max_tau = std::max(diag.max_tau, stats.diagnostics.max_tau);
    degenerate = degenerate || stats.degenerate;
  }
  attach_diagnostics(result.metadata, diag, degenerate);
  return result;
}

ExperimentResult sweep_stepsize(const RunConfig& config) {
  std::vector<double> sizes = config.step_sizes;
  std::sort(sizes.begin(), sizes.end());

  const HamiltonianTermSet terms = build_model(config.model);
  const StateVector psi0 = initial_state(config.model);
  check_strategy_against_model(config, terms);
  const double dim = terms.space().total_dim();

  std::vector<int> step_counts;
  double cost = 0.0;
  for (double s : sizes) {
    const int n = std::max(1, static_cast<int>(std::llround(config.t / s)));
    step_counts.push_back(n);
    cost += dim * dim * n * static_cast<double>(config.n_samples);
  }
  check_budget(config, cost);

  ExperimentResult result;
  result.kind = ExperimentResult::Kind::Sweep;
  result.metadata = base_metadata(config, "sweep-stepsize", "step_size");
  result.metadata["t"] = config.t;
  auto& points = result.metadata["points"] = ordered_json::array();

  CompilerDiagnostics diag;
  bool degenerate = false;
  for (size_t k = 0; k < sizes.size(); ++k) {
    const int n_steps = step_counts[k];
    points.push_back({{"step_size", sizes[k]}, {"n_steps", n_steps}});
    const PointStats stats = run_point(
        terms, psi0, config.t, n_steps, config.strategy, config.n_samples,
        derive_seed(config.master_seed, static_cast<std::uint64_t>(k)),
        config.jobs);
    result.records.push_back(SweepRecord{
        sizes[k], stats.mean, stats.std_error, stats.n_samples,
        strategy_tag(config.strategy), model_tag(config.model),
        config.master_seed});
    diag.negative_variance_clamps += stats.diagnostics.negative_variance_clamps;
    diag.max_tau = std::max(diag.max_tau, stats.diagnostics.max_tau);
    degenerate = degenerate || stats.degenerate;
  }
  attach_diagnostics(result.metadata, diag, degenerate);
  return result;
}

LinearFit extrapolate_zero_step(
    const std::vector<std::pair<double, double>>& points) {
  const size_t n = points.size();
  if (n < 2) {
    throw std::invalid_argument(
        "extrapolate_zero_step: need at least two points");
  }
  double x_mean = 0.0;
  double y_mean = 0.0;
  for (const auto& [x, y] : points) {
    x_mean += x;
    y_mean += y;
  }
  x_mean /= static_cast<double>(n);
  y_mean /= static_cast<double>(n);

  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - x_mean) * (x - x_mean);
    sxy += (x - x_mean) * (y - y_mean);
  }
  if (sxx == 0.0) {
    throw std::invalid_argument(
        "extrapolate_zero_step: abscissae are all identical");
  }

  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;
  if (n > 2) {
    double ssr = 0.0;
    for (const auto& [x, y] : points) {
      const double r = y - (fit.intercept + fit.slope * x);
      ssr += r * r;
    }
    const double sigma2 = ssr / static_cast<double>(n - 2);
    fit.intercept_se = std::sqrt(
        sigma2 * (1.0 / static_cast<double>(n) + x_mean * x_mean / sxx));
  }
  return fit;
}

ExperimentResult trace_probabilities(const RunConfig& config) {
  if (!config.strategy.is_adaptive()) {
    throw ConfigError(
        "trace-probs: probability traces are constant under fixed sampling "
        "strategies; use the adaptive strategy");
  }
  const HamiltonianTermSet terms = build_model(config.model);
  const StateVector psi0 = initial_state(config.model);
  check_strategy_against_model(config, terms);
  const double dim = terms.space().total_dim();
  check_budget(config, dim * dim * config.n_steps);

  Rng rng(derive_seed(config.master_seed, 0));
  TrajectoryOptions options;
  options.record_steps = true;
  options.seed = derive_seed(config.master_seed, 0);
  const TrajectoryResult trajectory = run_trajectory(
      terms, psi0, config.t, config.n_steps, config.strategy, rng, options);

  ExperimentResult result;
  result.kind = ExperimentResult::Kind::Trace;
  for (const StepRecord& rec : trajectory.step_log) {
    result.traces.push_back(
        TraceRecord{rec.step, rec.tau, rec.sampled_index, rec.probabilities});
  }
  result.metadata = base_metadata(config, "trace-probs", "step");
  result.metadata["t"] = config.t;
  result.metadata["n_steps"] = config.n_steps;
  result.metadata["trajectory_fidelity"] = trajectory.fidelity;
  result.metadata["term_labels"] = [&] {
    std::vector<std::string> labels;
    for (const Term& term : terms.terms()) labels.push_back(term.label);
    return labels;
  }();
  attach_diagnostics(result.metadata, trajectory.diagnostics, false);
  return result;
}

ExperimentResult shadow_bench(const RunConfig& config) {
  const HamiltonianTermSet terms = build_model(config.model);
  if (!terms.space().all_qubits()) {
    throw ConfigError(
        "shadow-bench: shadow estimation requires a qubit model (mfim)");
  }
  const StateVector psi0 = initial_state(config.model);
  const ShadowBenchConfig& bench = config.shadow_bench;

  double snapshot_budget = bench.calibration_shots;
  for (int n : bench.shots_grid) {
    snapshot_budget += static_cast<double>(n) * bench.repeats;
  }
  check_budget(config, static_cast<double>(terms.space().total_dim()) *
                           snapshot_budget);

  std::vector<std::vector<PauliString>> term_paulis;
  std::vector<double> exact_devs;
  for (const Term& term : terms.terms()) {
    term_paulis.push_back(pauli_decompose(term.op));
    exact_devs.push_back(std::sqrt(variance(term.op, psi0)));
  }
  const int n_terms = terms.term_count();

  // The estimator pipeline under test: moments from one shadow set, then the
  // same deviation rule the adaptive compiler applies.
  auto estimate_devs = [&](int n_shots, Rng& rng) {
    const ShadowSet set = sample_shadow_set(psi0, n_shots, rng);
    const ShadowConfig est_config{n_shots, bench.mom_batches};
    std::vector<TermMoments> moms;
    for (int j = 0; j < n_terms; ++j) {
      const ShadowMoments m =
          estimate_term_moments(set, term_paulis[static_cast<size_t>(j)],
                                est_config);
      moms.push_back(TermMoments{m.mean, m.second_moment, m.variance_se});
    }
    return term_deviations(moms, 1e-12);
  };

  ExperimentResult result;
  result.kind = ExperimentResult::Kind::ShadowBench;
  result.metadata = base_metadata(config, "shadow-bench", "n_shots");

  // Single-run calibration at the full budget.
  {
    Rng rng(derive_seed(config.master_seed, 0));
    const std::vector<double> devs = estimate_devs(bench.calibration_shots,
                                                   rng);
    for (int j = 0; j < n_terms; ++j) {
      result.shadow_records.push_back(ShadowBenchRecord{
          bench.calibration_shots, terms.term(j).label,
          exact_devs[static_cast<size_t>(j)], devs[static_cast<size_t>(j)],
          0.0, 1, config.master_seed});
    }
  }

  // Repeated runs over the shot grid for the scaling study.
  std::vector<int> grid = bench.shots_grid;
  std::sort(grid.begin(), grid.end());
  std::vector<std::vector<std::pair<double, double>>> scaling_points(
      static_cast<size_t>(n_terms));
  for (size_t g = 0; g < grid.size(); ++g) {
    std::vector<std::vector<double>> devs_per_term(
        static_cast<size_t>(n_terms));
    for (int r = 0; r < bench.repeats; ++r) {
      Rng rng(derive_seed(config.master_seed, g + 1,
                          static_cast<std::uint64_t>(r)));
      const std::vector<double> devs = estimate_devs(grid[g], rng);
      for (int j = 0; j < n_terms; ++j) {
        devs_per_term[static_cast<size_t>(j)].push_back(
            devs[static_cast<size_t>(j)]);
      }
    }
    for (int j = 0; j < n_terms; ++j) {
      const auto& samples = devs_per_term[static_cast<size_t>(j)];
      double mean = 0.0;
      for (double v : samples) mean += v;
      mean /= static_cast<double>(samples.size());
      double ss = 0.0;
      for (double v : samples) ss += (v - mean) * (v - mean);
      const double run_std =
          std::sqrt(ss / static_cast<double>(samples.size() - 1));
      result.shadow_records.push_back(ShadowBenchRecord{
          grid[g], terms.term(j).label, exact_devs[static_cast<size_t>(j)],
          mean, run_std, bench.repeats, config.master_seed});
      if (exact_devs[static_cast<size_t>(j)] > 1e-9 && run_std > 0.0) {
        scaling_points[static_cast<size_t>(j)].emplace_back(
            std::log(static_cast<double>(grid[g])), std::log(run_std));
      }
    }
  }

  auto& slopes = result.metadata["scaling_slopes"] = ordered_json::object();
  for (int j = 0; j < n_terms; ++j) {
    const auto& pts = scaling_points[static_cast<size_t>(j)];
    if (pts.size() >= 2) {
      slopes[terms.term(j).label] = extrapolate_zero_step(pts).slope;
    }
  }
  return result;
}

// --- emission ---------------------------------------------------------------

namespace {

std::string format_double(double v) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::logic_error("format_double failed");
  return std::string(buf, ptr);
}

std::string csv_body(const ExperimentResult& result) {
  std::ostringstream out;
  switch (result.kind) {
    case ExperimentResult::Kind::Sweep: {
      out << "abscissa,mean_fidelity,std_error,n_samples,strategy,model_tag,"
             "seed\n";
      for (const SweepRecord& r : result.records) {
        out << format_double(r.abscissa) << ',' << format_double(r.mean_fidelity)
            << ',' << format_double(r.std_error) << ',' << r.n_samples << ','
            << r.strategy << ',' << r.model_tag << ',' << r.seed << '\n';
      }
      break;
    }
    case ExperimentResult::Kind::Trace: {
      const size_t n_terms =
          result.traces.empty() ? 0 : result.traces.front().probs.size();
      out << "step,tau,sampled_index";
      for (size_t j = 1; j <= n_terms; ++j) out << ",p_" << j;
      out << '\n';
      for (const TraceRecord& r : result.traces) {
        out << r.step << ',' << format_double(r.tau) << ',' << r.sampled_index;
        for (double p : r.probs) out << ',' << format_double(p);
        out << '\n';
      }
      break;
    }
    case ExperimentResult::Kind::ShadowBench: {
      out << "n_shots,term,exact_dev,mean_est_dev,se_est_dev,repeats,seed\n";
      for (const ShadowBenchRecord& r : result.shadow_records) {
        out << r.n_shots << ',' << r.term << ',' << format_double(r.exact_dev)
            << ',' << format_double(r.mean_est_dev) << ','
            << format_double(r.se_est_dev) << ',' << r.repeats << ',' << r.seed
            << '\n';
      }
      break;
    }
  }
  return out.str();
}

}  // namespace

ordered_json result_to_json(const ExperimentResult& result) {
  ordered_json doc;
  doc["metadata"] = result.metadata;
  auto& records = doc["records"] = ordered_json::array();
  switch (result.kind) {
    case ExperimentResult::Kind::Sweep:
      for (const SweepRecord& r : result.records) {
        records.push_back({{"abscissa", r.abscissa},
                           {"mean_fidelity", r.mean_fidelity},
                           {"std_error", r.std_error},
                           {"n_samples", r.n_samples},
                           {"strategy", r.strategy},
                           {"model_tag", r.model_tag},
                           {"seed", r.seed}});
      }
      break;
    case ExperimentResult::Kind::Trace:
      for (const TraceRecord& r : result.traces) {
        ordered_json row;
        row["step"] = r.step;
        row["tau"] = r.tau;
        row["sampled_index"] = r.sampled_index;
        for (size_t j = 0; j < r.probs.size(); ++j) {
          row["p_" + std::to_string(j + 1)] = r.probs[j];
        }
        records.push_back(std::move(row));
      }
      break;
    case ExperimentResult::Kind::ShadowBench:
      for (const ShadowBenchRecord& r : result.shadow_records) {
        records.push_back({{"n_shots", r.n_shots},
                           {"term", r.term},
                           {"exact_dev", r.exact_dev},
                           {"mean_est_dev", r.mean_est_dev},
                           {"se_est_dev", r.se_est_dev},
                           {"repeats", r.repeats},
                           {"seed", r.seed}});
      }
      break;
  }
  return doc;
}

void emit(const ExperimentResult& result, const std::string& format,
          const std::string& path) {
  std::string payload;
  if (format == "csv") {
    payload = csv_body(result);
  } else if (format == "json") {
    payload = result_to_json(result).dump(2);
    payload.push_back('\n');
  } else {
    throw ConfigError("emit: format must be 'csv' or 'json', got '" + format +
                      "'");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("emit: cannot open output file: " + path);
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) {
    throw std::runtime_error("emit: write failed: " + path);
  }
}

}  // namespace rcsim
