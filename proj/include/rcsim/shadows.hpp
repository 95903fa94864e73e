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

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rcsim/hilbert.hpp"
#include "rcsim/models.hpp"
#include "rcsim/rng.hpp"

namespace rcsim {

/// One randomized single-qubit Pauli measurement: the basis drawn for each
/// qubit and the observed outcome bit.
struct Snapshot {
  std::vector<PauliLetter> bases;  // X, Y or Z per qubit
  std::vector<std::uint8_t> outcomes;
};

/// A classical shadow: the list of snapshots taken from identically prepared
/// copies of a state, plus the seed of the stream that produced it.
struct ShadowSet {
  std::vector<Snapshot> snapshots;
  std::uint64_t source_seed = 0;

  int num_qubits() const {
    return snapshots.empty() ? 0
                             : static_cast<int>(snapshots.front().bases.size());
  }
};

/// n_shots is the snapshot budget of one estimation call; mom_batches is the
/// median-of-means batch count K (K = 1 means a plain mean) and must divide
/// n_shots.
struct ShadowConfig {
  int n_shots = 10000;
  int mom_batches = 10;
};

/// Estimated first two moments of a term, with the standard error of the
/// implied variance taken from the batch spread (0 when K = 1).
struct ShadowMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance_se = 0.0;
};

/// Draws one randomized measurement from the state: a uniform independent
/// basis per qubit, then a computational-basis measurement of the rotated
/// state (sampled exactly from the Born probabilities).
Snapshot sample_snapshot(const StateVector& psi, Rng& rng);

/// n_shots independent snapshots from the same state.
ShadowSet sample_shadow_set(const StateVector& psi, int n_shots, Rng& rng,
                            std::uint64_t source_seed = 0);

/// Unbiased estimate of <P> for a Pauli string (coefficient ignored). Per
/// snapshot the estimate is a product over qubits: identity letters give 1;
/// a non-identity letter gives 3*(+-1) when the measured basis matches and
/// makes the whole product 0 otherwise. Median of means over mom_batches
/// batches (plain mean for the default of 1).
double estimate_pauli(const ShadowSet& shadow, const PauliString& p,
                      int mom_batches = 1);

/// Moments of a term given by its Pauli decomposition:
///   <H>   = sum_l c_l <P_l>
///   <H^2> = sum_{l,m} c_l c_m <P_l P_m>
/// Each product P_l P_m is reduced symbolically to a single string with a
/// phase; purely imaginary phases cancel in the symmetric l<->m sum, and the
/// identity string contributes exactly 1. All strings are estimated from the
/// one shadow set passed in (one measurement budget per update, not per
/// term).
ShadowMoments estimate_term_moments(const ShadowSet& shadow,
                                    const std::vector<PauliString>& term_paulis,
                                    const ShadowConfig& config);

/// Letterwise Pauli product with the accumulated phase in {1, -1, i, -i}.
/// The string result carries coefficient 1.
std::pair<Complex, PauliString> pauli_product(const PauliString& a,
                                              const PauliString& b);

// Binary audit stream: "RCSH" magic, format version, source seed, qubit
// count, snapshot count, then one basis byte ('X'/'Y'/'Z') and one outcome
// byte (0/1) per qubit per snapshot, little-endian integers.
void write_shadow_set(std::ostream& out, const ShadowSet& shadow);
ShadowSet read_shadow_set(std::istream& in);
void save_shadow_set(const std::string& path, const ShadowSet& shadow);
ShadowSet load_shadow_set(const std::string& path);

}  // namespace rcsim
