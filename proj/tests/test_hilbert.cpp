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

#include <doctest.h>

#include <cmath>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "rcsim/hilbert.hpp"
#include "rcsim/models.hpp"

using namespace rcsim;

namespace {

const HilbertSpace kQubit({2});

StateVector ket0() { return StateVector::basis_state(kQubit, 0); }
StateVector ket1() { return StateVector::basis_state(kQubit, 1); }
StateVector ket_plus() { return StateVector::superposition(kQubit, {0, 1}); }

HermitianOperator op_z() { return HermitianOperator(kQubit, pauli_matrix(PauliLetter::Z)); }
HermitianOperator op_x() { return HermitianOperator(kQubit, pauli_matrix(PauliLetter::X)); }

}  // namespace

TEST_CASE("hilbert space invariants") {
  HilbertSpace space({50, 2});
  CHECK(space.total_dim() == 100);
  CHECK_FALSE(space.all_qubits());
  CHECK(HilbertSpace({2, 2, 2}).all_qubits());
  CHECK_THROWS_AS(HilbertSpace({1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(HilbertSpace({}), std::invalid_argument);
}

TEST_CASE("state vector construction and normalization") {
  CHECK(ket_plus().amplitudes()(0).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(StateVector(kQubit, Vector::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(StateVector::basis_state(kQubit, 5), std::invalid_argument);

  Vector raw(2);
  raw << Complex(3.0, 0.0), Complex(0.0, 4.0);
  const StateVector psi = StateVector::normalized(kQubit, raw);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("eigendecomposition of Pauli operators") {
  const HermitianOperator z = op_z();
  const auto& spec_z = hermitian_eigendecompose(z);
  CHECK(spec_z.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(spec_z.eigenvalues(1) == doctest::Approx(1.0));
  // Diagonal matrix: each eigenvector is a standard basis vector.
  CHECK(spec_z.eigenvectors.col(0).cwiseAbs().maxCoeff() ==
        doctest::Approx(1.0));
  CHECK(spec_z.eigenvectors.col(1).cwiseAbs().maxCoeff() ==
        doctest::Approx(1.0));

  const HermitianOperator x = op_x();
  const auto& spec_x = hermitian_eigendecompose(x);
  CHECK(spec_x.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(spec_x.eigenvalues(1) == doctest::Approx(1.0));
}

TEST_CASE("eigendecomposition reconstructs a random Hermitian matrix") {
  Rng rng(1234);
  const Matrix a = oracles::random_hermitian(8, rng);
  HermitianOperator op(HilbertSpace({8}), a);
  const Spectrum& spec = op.spectrum();

  const Matrix rebuilt = spec.eigenvectors *
                         spec.eigenvalues.cast<Complex>().asDiagonal() *
                         spec.eigenvectors.adjoint();
  CHECK((rebuilt - a).cwiseAbs().maxCoeff() < 1e-10);
  const Matrix gram = spec.eigenvectors.adjoint() * spec.eigenvectors;
  CHECK((gram - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("non-Hermitian input is rejected with the asymmetry magnitude") {
  Matrix bad(2, 2);
  bad << 0.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_WITH_AS(HermitianOperator(kQubit, bad),
                       doctest::Contains("not Hermitian"),
                       std::invalid_argument);
}

TEST_CASE("apply_exp on Pauli generators") {
  // exp(-i X pi/2) = -i X, so |0> maps to -i |1>.
  const StateVector out = apply_exp(op_x(), M_PI / 2.0, ket0());
  CHECK(std::abs(out.amplitudes()(0)) < 1e-10);
  CHECK(std::abs(out.amplitudes()(1) - Complex(0.0, -1.0)) < 1e-10);

  // Eigenstates only pick up a global phase.
  const StateVector rotated = apply_exp(op_z(), 0.7, ket0());
  CHECK(std::abs(rotated.amplitudes()(0) -
                 Complex(std::cos(0.7), -std::sin(0.7))) < 1e-10);
  CHECK(fidelity_pure(rotated, ket0()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("apply_exp matches the Taylor-series oracle") {
  Rng rng(77);
  const HilbertSpace space({4});
  const Matrix a = oracles::random_hermitian(4, rng);
  const HermitianOperator op(space, a);
  const StateVector psi(space, oracles::random_state(4, rng));

  const StateVector fast = apply_exp(op, 0.1, psi);
  const Vector slow = oracles::taylor_expm_apply(a, 0.1, psi.amplitudes());
  CHECK((fast.amplitudes() - slow).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("apply_exp rejects mismatched spaces") {
  const HilbertSpace other({4});
  const StateVector psi = StateVector::basis_state(other, 0);
  CHECK_THROWS_AS(apply_exp(op_z(), 1.0, psi), std::invalid_argument);
}

TEST_CASE("evolve_exact basics") {
  const StateVector evolved = evolve_exact(op_z(), ket0(), 1.0);
  CHECK(std::abs(evolved.amplitudes()(0) - std::exp(Complex(0.0, -1.0))) <
        1e-10);

  Rng rng(5);
  const HilbertSpace space({4});
  const StateVector psi(space, oracles::random_state(4, rng));
  const HermitianOperator h(space, oracles::random_hermitian(4, rng));
  const StateVector frozen = evolve_exact(h, psi, 0.0);
  CHECK((frozen.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("evolve_exact matches a Runge-Kutta integration of the MFIM chain") {
  const HamiltonianTermSet terms = build_mfim(
      MfimParams{2, 1.0, 0.5, 0.3, Boundary::Open});
  const StateVector psi0 = StateVector::basis_state(terms.space(), 0);

  const StateVector spectral = evolve_exact(terms.total(), psi0, 0.5);
  const Vector integrated = oracles::rk4_schrodinger(
      terms.total().matrix(), psi0.amplitudes(), 0.5, 1e-4);
  CHECK((spectral.amplitudes() - integrated).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("expectation values") {
  CHECK(expectation(op_z(), ket0()) == doctest::Approx(1.0));
  CHECK(std::abs(expectation(op_z(), ket_plus())) < 1e-12);

  // Dense quadratic form oracle on the MFIM Hamiltonian.
  const HamiltonianTermSet terms = build_mfim(MfimParams{});
  const StateVector psi = initial_state(ModelSpec::mfim(MfimParams{}));
  const Complex direct =
      psi.amplitudes().dot(terms.total().matrix() * psi.amplitudes());
  CHECK(expectation(terms.total(), psi) ==
        doctest::Approx(direct.real()).epsilon(1e-12));
}

TEST_CASE("variance against brute-force dense algebra") {
  CHECK(variance(op_z(), ket0()) == 0.0);
  CHECK(variance(op_z(), ket_plus()) == doctest::Approx(1.0));

  Rng rng(99);
  const HilbertSpace space({8});
  const Matrix a = oracles::random_hermitian(8, rng);
  const HermitianOperator op(space, a);
  const StateVector psi(space, oracles::random_state(8, rng));

  const double mean = psi.amplitudes().dot(a * psi.amplitudes()).real();
  const double second = psi.amplitudes().dot(a * a * psi.amplitudes()).real();
  CHECK(variance(op, psi) ==
        doctest::Approx(second - mean * mean).epsilon(1e-10));
}

TEST_CASE("variance is non-negative and vanishes on eigenstates") {
  Rng rng(321);
  const HilbertSpace space({6});
  const HermitianOperator op(space, oracles::random_hermitian(6, rng));
  for (int trial = 0; trial < 10; ++trial) {
    const StateVector psi(space, oracles::random_state(6, rng));
    CHECK(variance(op, psi) >= 0.0);
  }
  const Spectrum& spec = op.spectrum();
  for (int k = 0; k < 6; ++k) {
    const StateVector eigenstate(space, spec.eigenvectors.col(k));
    CHECK(variance(op, eigenstate) < 1e-10);
  }
}

TEST_CASE("standard deviation is subadditive over term sums") {
  Rng rng(4242);
  const HilbertSpace space({4});
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = oracles::random_hermitian(4, rng);
    const Matrix b = oracles::random_hermitian(4, rng);
    const Matrix c = oracles::random_hermitian(4, rng);
    const StateVector psi(space, oracles::random_state(4, rng));
    const double lhs =
        std::sqrt(variance(HermitianOperator(space, a + b + c), psi));
    const double rhs = std::sqrt(variance(HermitianOperator(space, a), psi)) +
                       std::sqrt(variance(HermitianOperator(space, b), psi)) +
                       std::sqrt(variance(HermitianOperator(space, c), psi));
    CHECK(lhs <= rhs + 1e-10);
  }
}

TEST_CASE("qfi is four times the variance") {
  CHECK(qfi(op_z(), ket_plus()) == doctest::Approx(4.0));
  CHECK(qfi(op_z(), ket0()) == 0.0);

  const HamiltonianTermSet terms = build_mfim(MfimParams{});
  const StateVector psi = initial_state(ModelSpec::mfim(MfimParams{}));
  const HermitianOperator& h_x = terms.term(1).op;
  const double mean =
      psi.amplitudes().dot(h_x.matrix() * psi.amplitudes()).real();
  const double second =
      psi.amplitudes().dot(h_x.matrix() * h_x.matrix() * psi.amplitudes()).real();
  CHECK(qfi(h_x, psi) ==
        doctest::Approx(4.0 * (second - mean * mean)).epsilon(1e-10));
}

TEST_CASE("pure-state fidelity") {
  CHECK(fidelity_pure(ket_plus(), ket_plus()) == doctest::Approx(1.0));
  CHECK(fidelity_pure(ket0(), ket1()) == doctest::Approx(0.0));
  CHECK(fidelity_pure(ket0(), ket_plus()) == doctest::Approx(0.5));
}

TEST_CASE("fidelity is symmetric and phase invariant") {
  Rng rng(808);
  const HilbertSpace space({4});
  for (int trial = 0; trial < 10; ++trial) {
    const StateVector a(space, oracles::random_state(4, rng));
    const StateVector b(space, oracles::random_state(4, rng));
    const double f_ab = fidelity_pure(a, b);
    CHECK(f_ab == doctest::Approx(fidelity_pure(b, a)).epsilon(1e-12));

    const double phase = rng.uniform() * 2.0 * M_PI;
    const StateVector a_phased(
        space, (a.amplitudes() * std::exp(Complex(0.0, phase))).eval());
    CHECK(fidelity_pure(a_phased, b) == doctest::Approx(f_ab).epsilon(1e-12));
    CHECK(f_ab >= 0.0);
    CHECK(f_ab <= 1.0);
  }
}

TEST_CASE("spectral norms") {
  CHECK(spectral_norm(op_z()) == doctest::Approx(1.0));

  // Truncated number operator: diagonal with maximum D - 1.
  const HilbertSpace fock({50});
  const Matrix a = annihilation_matrix(50);
  CHECK(spectral_norm(HermitianOperator(fock, (a.adjoint() * a).eval())) ==
        doctest::Approx(49.0).epsilon(1e-12));

  // MFIM zz coupling: the all-aligned configuration saturates the norm.
  const HamiltonianTermSet terms = build_mfim(MfimParams{});
  CHECK(spectral_norm(terms.term(0).op) == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("spectral norm scales linearly") {
  Rng rng(31);
  const HilbertSpace space({4});
  const Matrix a = oracles::random_hermitian(4, rng);
  const double base = spectral_norm(HermitianOperator(space, a));
  CHECK(spectral_norm(HermitianOperator(space, (-2.5 * a).eval())) ==
        doctest::Approx(2.5 * base).epsilon(1e-12));
}

TEST_CASE("norm preservation and composition of apply_exp") {
  Rng rng(606);
  const HilbertSpace space({4});
  const HermitianOperator op(space, oracles::random_hermitian(4, rng));
  for (int trial = 0; trial < 10; ++trial) {
    const StateVector psi(space, oracles::random_state(4, rng));
    const double tau = 10.0 * rng.uniform();
    CHECK(std::abs(apply_exp(op, tau, psi).norm() - 1.0) < 1e-10);

    const double tau1 = 5.0 * rng.uniform();
    const double tau2 = 5.0 * rng.uniform();
    const StateVector once = apply_exp(op, tau1 + tau2, psi);
    const StateVector twice = apply_exp(op, tau2, apply_exp(op, tau1, psi));
    CHECK((once.amplitudes() - twice.amplitudes()).cwiseAbs().maxCoeff() <
          1e-10);
  }
}

TEST_CASE("tensor_embed places locals at the requested site") {
  const HilbertSpace two_qubits({2, 2});
  const Matrix z = pauli_matrix(PauliLetter::Z);
  const Matrix id = Matrix::Identity(2, 2);

  CHECK((tensor_embed(z, 0, two_qubits).matrix() - oracles::kron(z, id))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((tensor_embed(z, 1, two_qubits).matrix() - oracles::kron(id, z))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("embed_matrix handles non-Hermitian locals on hybrid spaces") {
  const HilbertSpace hybrid({3, 2});
  const Matrix a = annihilation_matrix(3);
  const Matrix expected = oracles::kron(a, Matrix::Identity(2, 2));
  CHECK((embed_matrix(a, 0, hybrid) - expected).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(embed_matrix(a, 1, hybrid), std::invalid_argument);
  CHECK_THROWS_AS(embed_matrix(a, 7, hybrid), std::invalid_argument);
}

TEST_CASE("spectrum cache is safe under concurrent first use") {
  Rng rng(4321);
  const HilbertSpace space({8});
  const HermitianOperator op(space, oracles::random_hermitian(8, rng));
  const StateVector psi(space, oracles::random_state(8, rng));

  std::vector<StateVector> results(8, psi);
  std::vector<std::thread> pool;
  for (int w = 0; w < 8; ++w) {
    pool.emplace_back([&, w] { results[static_cast<size_t>(w)] =
                                   apply_exp(op, 0.37, psi); });
  }
  for (auto& th : pool) th.join();
  for (int w = 1; w < 8; ++w) {
    CHECK((results[static_cast<size_t>(w)].amplitudes() -
           results[0].amplitudes())
              .norm() == 0.0);
  }
}

TEST_CASE("density matrices from pure states") {
  const DensityMatrix rho = DensityMatrix::from_pure(ket_plus());
  CHECK(rho.trace_real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rho.min_eigenvalue() > -1e-10);
  CHECK(fidelity_pure_mixed(ket_plus(), rho) == doctest::Approx(1.0));
  CHECK(fidelity_pure_mixed(ket0(), rho) == doctest::Approx(0.5));

  Matrix not_normalized = 2.0 * rho.matrix();
  CHECK_THROWS_AS(DensityMatrix(kQubit, not_normalized),
                  std::invalid_argument);
}
