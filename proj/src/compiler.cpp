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

#include "rcsim/compiler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rcsim {

namespace {

constexpr double kNegativeVarianceWarnTol = -1e-8;

}  // namespace

const char* strategy_tag(const SamplingStrategy& strategy) {
  switch (strategy.kind) {
    case StrategyKind::FixedQDrift: return "fixed-qdrift";
    case StrategyKind::EqualWeight: return "equal";
    case StrategyKind::HardTruncation: return "hard-truncation";
    case StrategyKind::FluctuationAdaptive:
      return strategy.moment_source == MomentSource::Exact ? "adaptive-exact"
                                                           : "adaptive-shadows";
  }
  throw std::logic_error("strategy_tag: invalid strategy kind");
}

ProbabilityVector::ProbabilityVector(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw std::invalid_argument("ProbabilityVector: empty distribution");
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) {
      throw std::invalid_argument(
          "ProbabilityVector: entries must be non-negative, got " +
          std::to_string(p));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument(
        "ProbabilityVector: entries sum to " + std::to_string(sum) +
        ", expected 1 within 1e-12");
  }
}

ProbabilityVector ProbabilityVector::uniform(int n) {
  if (n <= 0) {
    throw std::invalid_argument("ProbabilityVector::uniform: n must be > 0");
  }
  std::vector<double> p(static_cast<size_t>(n), 1.0 / static_cast<double>(n));
  // Compensate the representation error of 1/n so the sum is exactly 1.
  double sum = 0.0;
  for (double v : p) sum += v;
  p.back() += 1.0 - sum;
  return ProbabilityVector(std::move(p));
}

std::vector<double> term_deviations(const std::vector<TermMoments>& moments,
                                    double delta_var,
                                    CompilerDiagnostics* diag) {
  if (delta_var < 0.0) {
    throw std::invalid_argument("term_deviations: delta_var must be >= 0");
  }
  std::vector<double> deviations;
  deviations.reserve(moments.size());
  for (const TermMoments& m : moments) {
    double var = m.second_moment - m.mean * m.mean;
    if (var < kNegativeVarianceWarnTol && diag != nullptr) {
      ++diag->negative_variance_clamps;
    }
    if (var < delta_var) var = 0.0;  // variance floor; catches eigenstates
    // Finite-shot estimates: a variance within 3 standard errors of zero is
    // statistically indistinguishable from an eigenstate and is treated as 0
    // so the term is not sampled onto a huge time slice.
    if (m.variance_se > 0.0 && var <= 3.0 * m.variance_se) var = 0.0;
    deviations.push_back(std::sqrt(var));
  }
  return deviations;
}

namespace {

ProbabilityVector normalize_deviations(std::vector<double> deviations) {
  double sum = 0.0;
  for (double d : deviations) sum += d;
  if (sum <= 0.0) {
    // Simultaneous eigenstate of every term: any choice yields only global
    // phases, so sampling uniformly is as good as any distribution.
    return ProbabilityVector::uniform(static_cast<int>(deviations.size()));
  }
  std::vector<double> probs(deviations.size());
  double acc = 0.0;
  for (size_t j = 0; j + 1 < deviations.size(); ++j) {
    probs[j] = deviations[j] / sum;
    acc += probs[j];
  }
  probs.back() = 1.0 - acc;  // exact unit sum
  return ProbabilityVector(std::move(probs));
}

}  // namespace

ProbabilityVector fluctuation_probabilities(
    const std::vector<TermMoments>& moments, double delta_var,
    CompilerDiagnostics* diag) {
  if (moments.empty()) {
    throw std::invalid_argument("fluctuation_probabilities: no moments given");
  }
  return normalize_deviations(term_deviations(moments, delta_var, diag));
}

ProbabilityVector fluctuation_probabilities(const StateVector& psi,
                                            const HamiltonianTermSet& terms,
                                            double delta_var) {
  std::vector<TermMoments> mom;
  mom.reserve(static_cast<size_t>(terms.term_count()));
  for (const Term& term : terms.terms()) {
    const auto [mean, second] = moments(term.op, psi);
    mom.push_back(TermMoments{mean, second, 0.0});
  }
  return fluctuation_probabilities(mom, delta_var);
}

ProbabilityVector fixed_probabilities(const HamiltonianTermSet& terms,
                                      const SamplingStrategy& strategy) {
  const int n = terms.term_count();
  if (strategy.kind == StrategyKind::EqualWeight) {
    return ProbabilityVector::uniform(n);
  }
  if (!strategy.uses_weights()) {
    throw std::invalid_argument(
        "fixed_probabilities: adaptive strategies have no fixed distribution");
  }
  std::vector<double> weights;
  weights.reserve(static_cast<size_t>(n));
  double sum = 0.0;
  for (const Term& term : terms.terms()) {
    if (!term.weight_h.has_value()) {
      throw std::invalid_argument(
          "fixed_probabilities: term '" + term.label +
          "' has no weight; use equal-weight sampling or attach "
          "hard-truncation norms");
    }
    weights.push_back(*term.weight_h);
    sum += *term.weight_h;
  }
  std::vector<double> probs(weights.size());
  double acc = 0.0;
  for (size_t j = 0; j + 1 < weights.size(); ++j) {
    probs[j] = weights[j] / sum;
    acc += probs[j];
  }
  probs.back() = 1.0 - acc;
  return ProbabilityVector(std::move(probs));
}

double cost_epsilon(const std::vector<double>& deviations,
                    const ProbabilityVector& probs) {
  if (static_cast<int>(deviations.size()) != probs.size()) {
    throw std::invalid_argument(
        "cost_epsilon: deviation and probability lengths differ");
  }
  double cost = 0.0;
  for (size_t j = 0; j < deviations.size(); ++j) {
    const double dev = deviations[j];
    if (dev == 0.0) continue;  // zero-fluctuation terms cost nothing
    const double p = probs[static_cast<int>(j)];
    if (p <= 0.0) {
      return std::numeric_limits<double>::infinity();
    }
    cost += dev * dev / p;
  }
  return cost;
}

double predicted_fidelity(const StateVector& psi,
                          const HamiltonianTermSet& terms,
                          const ProbabilityVector& probs, double t,
                          int n_steps) {
  if (n_steps < 1) {
    throw std::invalid_argument("predicted_fidelity: n_steps must be >= 1");
  }
  std::vector<TermMoments> mom;
  mom.reserve(static_cast<size_t>(terms.term_count()));
  for (const Term& term : terms.terms()) {
    const auto [mean, second] = moments(term.op, psi);
    mom.push_back(TermMoments{mean, second, 0.0});
  }
  const std::vector<double> deviations = term_deviations(mom, 1e-12);
  const double total_var = variance(terms.total(), psi);
  const double tau = t / static_cast<double>(n_steps);
  return 1.0 + tau * tau * (total_var - cost_epsilon(deviations, probs));
}

DensityMatrix exact_channel_step(const DensityMatrix& rho,
                                 const HamiltonianTermSet& terms,
                                 const ProbabilityVector& probs, double t,
                                 int n_steps) {
  if (!(rho.space() == terms.space())) {
    throw std::invalid_argument(
        "exact_channel_step: density matrix and terms live on different "
        "spaces");
  }
  if (probs.size() != terms.term_count()) {
    throw std::invalid_argument(
        "exact_channel_step: probability length does not match term count");
  }
  if (n_steps < 1) {
    throw std::invalid_argument("exact_channel_step: n_steps must be >= 1");
  }
  const int dim = rho.space().total_dim();
  Matrix out = Matrix::Zero(dim, dim);
  for (int j = 0; j < terms.term_count(); ++j) {
    const double p = probs[j];
    if (p == 0.0) continue;  // no time slice defined for unsampled terms
    const double tau = t / (static_cast<double>(n_steps) * p);
    const Spectrum& spec = terms.term(j).op.spectrum();
    Vector phases(dim);
    for (int i = 0; i < dim; ++i) {
      const double angle = -spec.eigenvalues(i) * tau;
      phases(i) = Complex(std::cos(angle), std::sin(angle));
    }
    const Matrix unitary =
        spec.eigenvectors * phases.asDiagonal() * spec.eigenvectors.adjoint();
    out.noalias() += p * (unitary * rho.matrix() * unitary.adjoint());
  }
  // Round off the Hermitian part explicitly so accumulated floating-point
  // noise cannot trip the constructor's Hermiticity check.
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(rho.space(), std::move(out));
}

int sample_index(const ProbabilityVector& probs, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  int last_positive = -1;
  for (int j = 0; j < probs.size(); ++j) {
    const double p = probs[j];
    if (p <= 0.0) continue;
    last_positive = j;
    cumulative += p;
    if (u < cumulative) return j;
  }
  if (last_positive < 0) {
    throw std::logic_error("sample_index: distribution has empty support");
  }
  return last_positive;  // u landed in the rounding gap below 1
}

TrajectoryResult run_trajectory(const HamiltonianTermSet& terms,
                                const StateVector& psi0, double t, int n_steps,
                                const SamplingStrategy& strategy, Rng& rng,
                                const TrajectoryOptions& options) {
  if (n_steps < 0) {
    throw std::invalid_argument("run_trajectory: n_steps must be >= 0");
  }
  const StateVector reference = evolve_exact(terms.total(), psi0, t);

  // Shadow-based moment estimation only exists for qubit registers.
  std::vector<std::vector<PauliString>> term_paulis;
  const bool use_shadows = strategy.is_adaptive() &&
                           strategy.moment_source == MomentSource::Shadows;
  if (use_shadows) {
    if (!terms.space().all_qubits()) {
      throw std::invalid_argument(
          "run_trajectory: shadow moment estimation requires a qubit "
          "register; use exact moments for bosonic or hybrid models");
    }
    term_paulis.reserve(static_cast<size_t>(terms.term_count()));
    for (const Term& term : terms.terms()) {
      term_paulis.push_back(pauli_decompose(term.op));
    }
  }

  TrajectoryResult result{psi0, 0.0, options.seed, {}, {}};
  std::optional<ProbabilityVector> fixed;
  if (!strategy.is_adaptive()) {
    fixed = fixed_probabilities(terms, strategy);
  }
  if (options.record_steps) {
    result.step_log.reserve(static_cast<size_t>(n_steps));
  }

  StateVector psi = psi0;
  for (int step = 0; step < n_steps; ++step) {
    ProbabilityVector probs = [&]() {
      if (fixed) return *fixed;
      if (use_shadows) {
        const ShadowSet shadow =
            sample_shadow_set(psi, strategy.shadow_config.n_shots, rng);
        std::vector<TermMoments> mom;
        mom.reserve(term_paulis.size());
        for (const auto& paulis : term_paulis) {
          const ShadowMoments est =
              estimate_term_moments(shadow, paulis, strategy.shadow_config);
          mom.push_back(
              TermMoments{est.mean, est.second_moment, est.variance_se});
        }
        return fluctuation_probabilities(mom, strategy.delta_var,
                                         &result.diagnostics);
      }
      return fluctuation_probabilities(psi, terms, strategy.delta_var);
    }();

    const int j = sample_index(probs, rng);
    const double tau = t / (static_cast<double>(n_steps) * probs[j]);
    result.diagnostics.max_tau = std::max(result.diagnostics.max_tau, tau);
    psi = apply_exp(terms.term(j).op, tau, psi);

    if (options.record_steps) {
      result.step_log.push_back(StepRecord{step, j, tau, probs.probs()});
    }
  }

  result.final_state = std::move(psi);
  result.fidelity = fidelity_pure(reference, result.final_state);
  return result;
}

}  // namespace rcsim
