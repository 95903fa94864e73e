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

#include "rcsim/models.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rcsim {

namespace {

constexpr double kDropCoefficientTol = 1e-12;

Matrix pauli_i() { return Matrix::Identity(2, 2); }
Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}
Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

/// Wraps a dense term matrix and drops it when it is numerically zero (such
/// terms carry zero weight under every strategy and would break norm-weighted
/// probabilities).
void push_term_if_nonzero(std::vector<Term>& terms, const HilbertSpace& space,
                          const std::string& label, Matrix matrix) {
  if (matrix.cwiseAbs().maxCoeff() <= kDropCoefficientTol) return;
  HermitianOperator op(space, std::move(matrix));
  const double norm = spectral_norm(op);
  terms.push_back(Term{label, std::move(op), norm});
}

}  // namespace

HamiltonianTermSet::HamiltonianTermSet(HilbertSpace space,
                                       std::vector<Term> terms)
    : space_(std::move(space)),
      terms_(std::move(terms)),
      total_([&] {
        if (terms_.empty()) {
          throw std::invalid_argument(
              "HamiltonianTermSet: at least one term required");
        }
        Matrix sum = Matrix::Zero(space_.total_dim(), space_.total_dim());
        for (const Term& t : terms_) {
          if (!(t.op.space() == space_)) {
            throw std::invalid_argument(
                "HamiltonianTermSet: term '" + t.label +
                "' lives on a different space than the set");
          }
          if (t.weight_h.has_value() && *t.weight_h <= 0.0) {
            throw std::invalid_argument("HamiltonianTermSet: weight of term '" +
                                        t.label + "' must be positive");
          }
          sum += t.op.matrix();
        }
        return HermitianOperator(space_, std::move(sum));
      }()) {}

int PauliString::weight() const {
  int w = 0;
  for (PauliLetter l : letters) {
    if (l != PauliLetter::I) ++w;
  }
  return w;
}

std::string PauliString::letters_str() const {
  static const char names[] = {'I', 'X', 'Y', 'Z'};
  std::string s;
  s.reserve(letters.size());
  for (PauliLetter l : letters) s.push_back(names[static_cast<int>(l)]);
  return s;
}

Matrix pauli_matrix(PauliLetter letter) {
  switch (letter) {
    case PauliLetter::I: return pauli_i();
    case PauliLetter::X: return pauli_x();
    case PauliLetter::Y: return pauli_y();
    case PauliLetter::Z: return pauli_z();
  }
  throw std::logic_error("pauli_matrix: invalid letter");
}

Matrix pauli_string_matrix(const std::vector<PauliLetter>& letters) {
  Matrix out = Matrix::Identity(1, 1);
  for (PauliLetter l : letters) {
    const Matrix local = pauli_matrix(l);
    Matrix next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      for (Eigen::Index c = 0; c < out.cols(); ++c) {
        next.block(2 * r, 2 * c, 2, 2) = out(r, c) * local;
      }
    }
    out = std::move(next);
  }
  return out;
}

std::string model_tag(const ModelSpec& spec) {
  std::ostringstream tag;
  if (const auto* m = std::get_if<MfimParams>(&spec.params)) {
    tag << "mfim-L" << m->chain_length
        << (m->boundary == Boundary::Periodic ? "-pbc" : "-open");
  } else if (const auto* k = std::get_if<KerrParams>(&spec.params)) {
    tag << "kerr-D" << k->fock_dim;
  } else {
    tag << "rabi-D" << std::get<RabiParams>(spec.params).fock_dim;
  }
  return tag.str();
}

HamiltonianTermSet build_mfim(const MfimParams& p) {
  if (p.chain_length < 2) {
    throw std::invalid_argument("build_mfim: chain_length must be >= 2");
  }
  if (p.boundary == Boundary::Periodic && p.chain_length == 2) {
    throw std::invalid_argument(
        "build_mfim: periodic boundary on a 2-site chain counts the single "
        "bond twice; use an open boundary for this size");
  }
  const int L = p.chain_length;
  HilbertSpace space(std::vector<int>(L, 2));
  const int dim = space.total_dim();

  Matrix h_zz = Matrix::Zero(dim, dim);
  Matrix h_x = Matrix::Zero(dim, dim);
  Matrix h_z = Matrix::Zero(dim, dim);
  const int bonds = (p.boundary == Boundary::Periodic) ? L : L - 1;
  for (int i = 0; i < bonds; ++i) {
    h_zz -= p.coupling_j * (embed_matrix(pauli_z(), i, space) *
                            embed_matrix(pauli_z(), (i + 1) % L, space));
  }
  for (int i = 0; i < L; ++i) {
    h_x -= p.coupling_j * p.h_x * embed_matrix(pauli_x(), i, space);
    h_z -= p.coupling_j * p.h_z * embed_matrix(pauli_z(), i, space);
  }

  std::vector<Term> terms;
  push_term_if_nonzero(terms, space, "zz", std::move(h_zz));
  push_term_if_nonzero(terms, space, "x", std::move(h_x));
  push_term_if_nonzero(terms, space, "z", std::move(h_z));
  return HamiltonianTermSet(space, std::move(terms));
}

Matrix annihilation_matrix(int dim) {
  if (dim < 2) {
    throw std::invalid_argument("annihilation_matrix: dimension must be >= 2");
  }
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

HamiltonianTermSet build_kerr(const KerrParams& p) {
  if (p.fock_dim < 2) {
    throw std::invalid_argument("build_kerr: fock_dim must be >= 2");
  }
  HilbertSpace space({p.fock_dim});
  const Matrix a = annihilation_matrix(p.fock_dim);
  const Matrix ad = a.adjoint();

  Matrix drift = p.detuning * (ad * a);
  Matrix kerr = 0.5 * p.kerr * (ad * ad * a * a);
  Matrix drive = p.drive * (a + ad);

  std::vector<Term> terms;
  push_term_if_nonzero(terms, space, "detuning", std::move(drift));
  push_term_if_nonzero(terms, space, "kerr", std::move(kerr));
  push_term_if_nonzero(terms, space, "drive", std::move(drive));
  return HamiltonianTermSet(space, std::move(terms));
}

HamiltonianTermSet build_rabi(const RabiParams& p) {
  if (p.fock_dim < 2) {
    throw std::invalid_argument("build_rabi: fock_dim must be >= 2");
  }
  // Boson factor first, qubit second; |n, s> flattens to index 2n + s.
  HilbertSpace space({p.fock_dim, 2});
  const Matrix a = annihilation_matrix(p.fock_dim);
  const Matrix number = (a.adjoint() * a).eval();

  Matrix field = p.field_freq * embed_matrix(number, 0, space);
  Matrix qubit = 0.5 * p.qubit_freq * embed_matrix(pauli_z(), 1, space);
  Matrix coupled = p.coupling * (embed_matrix((a + a.adjoint()).eval(), 0,
                                              space) *
                                 embed_matrix(pauli_x(), 1, space));

  std::vector<Term> terms;
  push_term_if_nonzero(terms, space, "field", std::move(field));
  push_term_if_nonzero(terms, space, "qubit", std::move(qubit));
  push_term_if_nonzero(terms, space, "coupling", std::move(coupled));
  return HamiltonianTermSet(space, std::move(terms));
}

HamiltonianTermSet build_model(const ModelSpec& spec) {
  return std::visit(
      [](const auto& params) -> HamiltonianTermSet {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, MfimParams>) return build_mfim(params);
        if constexpr (std::is_same_v<T, KerrParams>) return build_kerr(params);
        if constexpr (std::is_same_v<T, RabiParams>) return build_rabi(params);
      },
      spec.params);
}

namespace {

HilbertSpace model_space(const ModelSpec& spec) {
  if (const auto* m = std::get_if<MfimParams>(&spec.params)) {
    return HilbertSpace(std::vector<int>(m->chain_length, 2));
  }
  if (const auto* k = std::get_if<KerrParams>(&spec.params)) {
    return HilbertSpace({k->fock_dim});
  }
  return HilbertSpace({std::get<RabiParams>(spec.params).fock_dim, 2});
}

InitialStateSpec default_initial_state(const ModelSpec& spec) {
  if (const auto* m = std::get_if<MfimParams>(&spec.params)) {
    // Half spins up, half down: |00...11...>.
    std::string bits(m->chain_length, '1');
    for (int i = 0; i < m->chain_length / 2; ++i) bits[i] = '0';
    return BitstringState{bits};
  }
  if (std::holds_alternative<KerrParams>(spec.params)) {
    return FockLevelsState{{1, 5}};
  }
  return FockQubitState{{{2, 0}, {5, 0}}};
}

StateVector make_initial_state(const HilbertSpace& space,
                               const InitialStateSpec& init) {
  if (const auto* b = std::get_if<BitstringState>(&init)) {
    if (!space.all_qubits() ||
        static_cast<int>(b->bits.size()) != space.num_factors()) {
      throw std::invalid_argument(
          "initial_state: bitstring length does not match the qubit register");
    }
    int index = 0;
    for (char c : b->bits) {
      if (c != '0' && c != '1') {
        throw std::invalid_argument(
            "initial_state: bitstring must contain only 0/1, got '" +
            std::string(1, c) + "'");
      }
      index = 2 * index + (c - '0');
    }
    return StateVector::basis_state(space, index);
  }
  if (const auto* f = std::get_if<FockLevelsState>(&init)) {
    if (space.num_factors() != 1) {
      throw std::invalid_argument(
          "initial_state: Fock-level descriptor requires a single bosonic "
          "mode");
    }
    std::vector<int> indices;
    for (int n : f->levels) {
      if (n < 0 || n >= space.total_dim()) {
        throw std::invalid_argument("initial_state: Fock level " +
                                    std::to_string(n) +
                                    " outside the truncation dimension " +
                                    std::to_string(space.total_dim()));
      }
      indices.push_back(n);
    }
    return StateVector::superposition(space, indices);
  }
  const auto& fq = std::get<FockQubitState>(init);
  if (space.num_factors() != 2 || space.factor(1) != 2) {
    throw std::invalid_argument(
        "initial_state: |n,s> descriptor requires a boson (x) qubit space");
  }
  std::vector<int> indices;
  for (const auto& [n, s] : fq.levels) {
    if (n < 0 || n >= space.factor(0)) {
      throw std::invalid_argument("initial_state: Fock level " +
                                  std::to_string(n) +
                                  " outside the truncation dimension " +
                                  std::to_string(space.factor(0)));
    }
    if (s != 0 && s != 1) {
      throw std::invalid_argument("initial_state: qubit label must be 0 or 1");
    }
    indices.push_back(2 * n + s);  // boson-major flattening
  }
  return StateVector::superposition(space, indices);
}

}  // namespace

StateVector initial_state(const ModelSpec& spec) {
  const HilbertSpace space = model_space(spec);
  const InitialStateSpec init =
      spec.initial_state ? *spec.initial_state : default_initial_state(spec);
  return make_initial_state(space, init);
}

std::vector<PauliString> pauli_decompose(const HermitianOperator& op) {
  const HilbertSpace& space = op.space();
  if (!space.all_qubits()) {
    throw std::invalid_argument(
        "pauli_decompose: operator must live on a pure qubit register");
  }
  const int n = space.num_factors();
  const int dim = space.total_dim();
  const double inv_dim = 1.0 / static_cast<double>(dim);

  std::vector<PauliString> out;
  std::vector<PauliLetter> letters(n, PauliLetter::I);
  const long total_strings = 1L << (2 * n);
  for (long code = 0; code < total_strings; ++code) {
    long rest = code;
    for (int q = 0; q < n; ++q) {
      letters[q] = static_cast<PauliLetter>(rest & 3);
      rest >>= 2;
    }
    const Matrix p = pauli_string_matrix(letters);
    // Tr(P A) = sum_{ij} P_ij A_ji; real for Hermitian A and Pauli P.
    const Complex trace = (p.array() * op.matrix().transpose().array()).sum();
    const double coeff = trace.real() * inv_dim;
    if (std::abs(coeff) >= kDropCoefficientTol) {
      out.push_back(PauliString{coeff, letters});
    }
  }
  return out;
}

}  // namespace rcsim
