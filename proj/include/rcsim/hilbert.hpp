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

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <mutex>
#include <vector>

namespace rcsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Numerical tolerances used by the dense backbone. Dimensions stay <= a few
// hundred, so double precision meets these comfortably.
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kVarianceClampTol = 1e-12;

/// Composite Hilbert space described by an ordered list of subsystem
/// dimensions (2 for a qubit, D for a truncated bosonic mode). The ordering
/// is fixed at construction: factor 0 is the leftmost (most significant)
/// Kronecker factor. Hybrid spaces put the bosonic factor first.
class HilbertSpace {
 public:
  explicit HilbertSpace(std::vector<int> factors);

  const std::vector<int>& factors() const { return factors_; }
  int factor(int site) const { return factors_.at(site); }
  int num_factors() const { return static_cast<int>(factors_.size()); }
  int total_dim() const { return total_dim_; }
  bool all_qubits() const;

  friend bool operator==(const HilbertSpace& a, const HilbertSpace& b) {
    return a.factors_ == b.factors_;
  }

 private:
  std::vector<int> factors_;
  int total_dim_ = 0;
};

/// Normalized complex amplitude vector over a composite Hilbert space.
class StateVector {
 public:
  StateVector(HilbertSpace space, Vector amplitudes);

  /// Computational basis state |index> in the flattened ordering.
  static StateVector basis_state(const HilbertSpace& space, int index);

  /// Equal superposition of the listed basis indices.
  static StateVector superposition(const HilbertSpace& space,
                                   const std::vector<int>& indices);

  /// Builds a state from arbitrary amplitudes, normalizing them.
  static StateVector normalized(HilbertSpace space, Vector amplitudes);

  const HilbertSpace& space() const { return space_; }
  const Vector& amplitudes() const { return amps_; }
  int dim() const { return static_cast<int>(amps_.size()); }
  double norm() const { return amps_.norm(); }

 private:
  HilbertSpace space_;
  Vector amps_;
};

/// Real eigenvalues and unitary eigenvectors of a Hermitian operator.
struct Spectrum {
  Eigen::VectorXd eigenvalues;
  Matrix eigenvectors;
};

/// Dense Hermitian operator with a lazily populated spectral cache. The cache
/// is idempotent and safe to populate under concurrent reads; everything else
/// is immutable after construction.
class HermitianOperator {
 public:
  HermitianOperator(HilbertSpace space, Matrix matrix);

  HermitianOperator(const HermitianOperator& other);
  HermitianOperator& operator=(const HermitianOperator& other);
  HermitianOperator(HermitianOperator&& other) noexcept;
  HermitianOperator& operator=(HermitianOperator&& other) noexcept;

  const HilbertSpace& space() const { return space_; }
  const Matrix& matrix() const { return mat_; }
  int dim() const { return static_cast<int>(mat_.rows()); }

  bool has_spectrum() const;
  /// Eigendecomposition, computed on first use and cached.
  const Spectrum& spectrum() const;

 private:
  HilbertSpace space_;
  Matrix mat_;
  mutable std::shared_ptr<const Spectrum> spectrum_;
  mutable std::mutex spectrum_mutex_;
};

/// Dense density matrix; used only on the channel-verification path.
class DensityMatrix {
 public:
  DensityMatrix(HilbertSpace space, Matrix matrix);

  static DensityMatrix from_pure(const StateVector& psi);

  const HilbertSpace& space() const { return space_; }
  const Matrix& matrix() const { return mat_; }
  double trace_real() const { return mat_.trace().real(); }
  /// Smallest eigenvalue; positivity diagnostics.
  double min_eigenvalue() const;

 private:
  HilbertSpace space_;
  Matrix mat_;
};

// ---------------------------------------------------------------------------
// Operations

/// Forces population of the spectral cache and returns a reference to it.
/// Reconstruction V diag(l) V^dagger reproduces the input within 1e-10.
const Spectrum& hermitian_eigendecompose(const HermitianOperator& op);

/// exp(-i A tau) |psi> through the cached spectral decomposition of A.
StateVector apply_exp(const HermitianOperator& term, double tau,
                      const StateVector& psi);

/// exp(-i H t) |psi0> through the full eigendecomposition of H.
StateVector evolve_exact(const HermitianOperator& hamiltonian,
                         const StateVector& psi0, double t);

/// <psi| A |psi>. The imaginary residue (below 1e-10 for Hermitian input) is
/// discarded.
double expectation(const HermitianOperator& op, const StateVector& psi);

/// First two moments <A>, <A^2> from a single matrix-vector product.
std::pair<double, double> moments(const HermitianOperator& op,
                                  const StateVector& psi);

/// <A^2> - <A>^2, clamped to 0 if within -1e-12 of 0.
double variance(const HermitianOperator& op, const StateVector& psi);

/// Quantum Fisher information of a pure state under the given generator:
/// 4 * variance.
double qfi(const HermitianOperator& generator, const StateVector& psi);

/// |<a|b>|^2, clamped to [0, 1].
double fidelity_pure(const StateVector& a, const StateVector& b);

/// <psi| rho |psi>, the pure-vs-mixed trace fidelity Tr(|psi><psi| rho).
double fidelity_pure_mixed(const StateVector& psi, const DensityMatrix& rho);

/// Largest |eigenvalue|.
double spectral_norm(const HermitianOperator& op);

/// Kronecker-embeds a local matrix at the given factor site: identity on all
/// other factors, factor ordering fixed by the space. Works for arbitrary
/// local matrices (e.g. ladder operators).
Matrix embed_matrix(const Matrix& local, int site, const HilbertSpace& space);

/// embed_matrix restricted to Hermitian locals, wrapped as an operator.
HermitianOperator tensor_embed(const Matrix& local, int site,
                               const HilbertSpace& space);

}  // namespace rcsim
