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

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rcsim/hilbert.hpp"

namespace rcsim {

/// One grouped Hamiltonian term. weight_h is the positive weighting factor
/// used by norm-proportional sampling; it is absent for terms that are
/// unbounded before truncation when equal-weight sampling is intended.
struct Term {
  std::string label;
  HermitianOperator op;
  std::optional<double> weight_h;
};

/// A Hamiltonian decomposed into grouped Hermitian terms, H = sum_j H_j,
/// together with the assembled total operator.
class HamiltonianTermSet {
 public:
  HamiltonianTermSet(HilbertSpace space, std::vector<Term> terms);

  const HilbertSpace& space() const { return space_; }
  const std::vector<Term>& terms() const { return terms_; }
  const Term& term(int j) const { return terms_.at(j); }
  int term_count() const { return static_cast<int>(terms_.size()); }
  const HermitianOperator& total() const { return total_; }

 private:
  HilbertSpace space_;
  std::vector<Term> terms_;
  HermitianOperator total_;
};

enum class PauliLetter : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

/// A weighted tensor product of single-qubit Pauli operators.
struct PauliString {
  double coefficient = 0.0;
  std::vector<PauliLetter> letters;

  int weight() const;           // number of non-identity letters
  bool is_identity() const { return weight() == 0; }
  std::string letters_str() const;
};

/// Dense matrix of a Pauli string (without its coefficient).
Matrix pauli_string_matrix(const std::vector<PauliLetter>& letters);

/// The four single-qubit Pauli matrices.
Matrix pauli_matrix(PauliLetter letter);

enum class Boundary { Periodic, Open };

/// Mixed-field Ising chain: H = -J sum_i [sz_i sz_{i+1} + h_x sx_i + h_z sz_i].
struct MfimParams {
  int chain_length = 4;
  double coupling_j = 1.0;
  double h_x = 0.5;
  double h_z = 0.3;
  Boundary boundary = Boundary::Periodic;
};

/// Driven Kerr oscillator truncated to the lowest fock_dim levels:
/// H = detuning a^dag a + (kerr/2) a^dag a^dag a a + drive (a + a^dag).
struct KerrParams {
  double detuning = 0.3;
  double kerr = 1.0;
  double drive = 0.5;
  int fock_dim = 50;
};

/// Rabi model on a boson (x) qubit space, boson factor first:
/// H = field_freq a^dag a + (qubit_freq/2) sz + coupling (a + a^dag) sx.
struct RabiParams {
  double field_freq = 1.0;
  double qubit_freq = 1.0;
  double coupling = 0.2;
  int fock_dim = 50;
};

/// Initial-state descriptor:
///  - Bitstring: computational basis state of a qubit register, qubit 0 as
///    the most significant digit ("0011" -> index 3 on 4 qubits).
///  - FockLevels: equal superposition of the listed Fock levels.
///  - FockQubitLevels: equal superposition of |n, s> pairs on a boson-major
///    hybrid space.
struct BitstringState {
  std::string bits;
};
struct FockLevelsState {
  std::vector<int> levels;
};
struct FockQubitState {
  std::vector<std::pair<int, int>> levels;  // (fock level, qubit bit)
};
using InitialStateSpec =
    std::variant<BitstringState, FockLevelsState, FockQubitState>;

struct ModelSpec {
  std::variant<MfimParams, KerrParams, RabiParams> params;
  std::optional<InitialStateSpec> initial_state;  // model default when absent

  static ModelSpec mfim(MfimParams p) { return {p, std::nullopt}; }
  static ModelSpec kerr(KerrParams p) { return {p, std::nullopt}; }
  static ModelSpec rabi(RabiParams p) { return {p, std::nullopt}; }
};

/// Compact tag for result rows, e.g. "mfim-L4-pbc", "kerr-D50", "rabi-D50".
std::string model_tag(const ModelSpec& spec);

HamiltonianTermSet build_mfim(const MfimParams& params);
HamiltonianTermSet build_kerr(const KerrParams& params);
HamiltonianTermSet build_rabi(const RabiParams& params);

/// Dispatches to the matching builder.
HamiltonianTermSet build_model(const ModelSpec& spec);

/// Initial state for the model, from the explicit descriptor or the model
/// default (MFIM: half-up half-down bitstring; Kerr: (|1>+|5>)/sqrt(2);
/// Rabi: (|2,0>+|5,0>)/sqrt(2)).
StateVector initial_state(const ModelSpec& spec);

/// Truncated annihilation operator, <n-1|a|n> = sqrt(n) for n < dim.
Matrix annihilation_matrix(int dim);

/// Expands a qubit-space operator into Pauli strings via the trace inner
/// product c_P = Tr(P A) / 2^n. Strings with |c| < 1e-12 are dropped; the
/// kept strings reconstruct the operator within 1e-10.
std::vector<PauliString> pauli_decompose(const HermitianOperator& op);

}  // namespace rcsim
