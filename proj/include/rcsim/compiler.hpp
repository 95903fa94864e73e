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
#include <optional>
#include <vector>

#include "rcsim/hilbert.hpp"
#include "rcsim/models.hpp"
#include "rcsim/rng.hpp"
#include "rcsim/shadows.hpp"

namespace rcsim {

enum class StrategyKind {
  FixedQDrift,          // p_j proportional to the term weights h_j
  EqualWeight,          // uniform sampling
  HardTruncation,       // fixed weights from truncated operator norms;
                        // same sampling rule as FixedQDrift, kept as a
                        // separate tag so result rows name the method
  FluctuationAdaptive,  // p_j proportional to the instantaneous std dev
};

enum class MomentSource { Exact, Shadows };

struct SamplingStrategy {
  StrategyKind kind = StrategyKind::FixedQDrift;
  // Adaptive-only knobs.
  MomentSource moment_source = MomentSource::Exact;
  double delta_var = 1e-12;  // variances below this floor are treated as 0
  ShadowConfig shadow_config{};

  bool is_adaptive() const { return kind == StrategyKind::FluctuationAdaptive; }
  bool uses_weights() const {
    return kind == StrategyKind::FixedQDrift ||
           kind == StrategyKind::HardTruncation;
  }
};

const char* strategy_tag(const SamplingStrategy& strategy);

/// Discrete distribution over term indices: entries >= 0, sum 1 within 1e-12.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> probs);

  const std::vector<double>& probs() const { return probs_; }
  double operator[](int j) const { return probs_[static_cast<size_t>(j)]; }
  int size() const { return static_cast<int>(probs_.size()); }

  static ProbabilityVector uniform(int n);

 private:
  std::vector<double> probs_;
};

/// First and second moments of one term on the current state, plus the
/// standard error of the implied variance when the moments came from a
/// finite-shot estimator (0 for exact moments).
struct TermMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance_se = 0.0;
};

/// Counters for conditions that are handled, not fatal.
struct CompilerDiagnostics {
  long negative_variance_clamps = 0;  // estimator noise drove <H^2>-<H>^2 < 0
  double max_tau = 0.0;               // largest evolution slice applied
};

struct StepRecord {
  int step = 0;
  int sampled_index = 0;
  double tau = 0.0;
  std::vector<double> probabilities;
};

struct TrajectoryResult {
  StateVector final_state;
  double fidelity = 0.0;
  std::uint64_t seed = 0;
  std::vector<StepRecord> step_log;  // filled only when recording
  CompilerDiagnostics diagnostics;
};

/// Std deviations from supplied moments: sqrt(max(m2 - m1^2, 0)). A variance
/// below the delta_var floor, or within 3 standard errors of zero under
/// finite-shot moments, is treated as exactly 0. Variances more negative
/// than -1e-8 bump the clamp counter (possible under shadow noise) but never
/// abort.
std::vector<double> term_deviations(const std::vector<TermMoments>& moments,
                                    double delta_var,
                                    CompilerDiagnostics* diag = nullptr);

/// Optimal sampling distribution p_j = dev_j / sum_k dev_k. If every
/// deviation is 0 (the state is a simultaneous eigenstate of all terms, so
/// every gate is a global phase), falls back to the uniform distribution.
ProbabilityVector fluctuation_probabilities(
    const std::vector<TermMoments>& moments, double delta_var,
    CompilerDiagnostics* diag = nullptr);

/// Convenience overload: exact moments evaluated on the state.
ProbabilityVector fluctuation_probabilities(const StateVector& psi,
                                            const HamiltonianTermSet& terms,
                                            double delta_var = 1e-12);

/// Weight-proportional (FixedQDrift / HardTruncation) or uniform
/// (EqualWeight) distribution. Rejects weight-based strategies when a term
/// carries no weight.
ProbabilityVector fixed_probabilities(const HamiltonianTermSet& terms,
                                      const SamplingStrategy& strategy);

/// Sampling cost eps = sum_j dev_j^2 / p_j. Terms with dev_j = 0 contribute
/// 0 regardless of p_j; dev_j > 0 with p_j = 0 yields +infinity (an explicit
/// infeasibility signal, not an overflow).
double cost_epsilon(const std::vector<double>& deviations,
                    const ProbabilityVector& probs);

/// Second-order fidelity estimate for one compilation step of size t/N:
/// F ~ 1 + (t^2/N^2) [ Var(H) - sum_j Var(H_j)/p_j ].
double predicted_fidelity(const StateVector& psi,
                          const HamiltonianTermSet& terms,
                          const ProbabilityVector& probs, double t, int n_steps);

/// One step of the sampling channel: E(rho) = sum_j p_j U_j rho U_j^dagger
/// with U_j = exp(-i H_j t/(N p_j)). Terms with p_j = 0 are skipped.
DensityMatrix exact_channel_step(const DensityMatrix& rho,
                                 const HamiltonianTermSet& terms,
                                 const ProbabilityVector& probs, double t,
                                 int n_steps);

/// Draws an index with p > 0; the distribution matches probs.
int sample_index(const ProbabilityVector& probs, Rng& rng);

struct TrajectoryOptions {
  bool record_steps = false;
  std::uint64_t seed = 0;  // echoed into the result
};

/// Runs one randomized compilation trajectory: N iterations of
/// (update probabilities per strategy -> sample a term -> apply
/// exp(-i H_j t/(N p_j))). Fixed strategies compute the distribution once;
/// the adaptive strategy recomputes it from the current state every step.
/// The returned fidelity is measured against exp(-i H t) |psi0>.
TrajectoryResult run_trajectory(const HamiltonianTermSet& terms,
                                const StateVector& psi0, double t, int n_steps,
                                const SamplingStrategy& strategy, Rng& rng,
                                const TrajectoryOptions& options = {});

}  // namespace rcsim
