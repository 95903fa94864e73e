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

#include "rcsim/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rcsim {

namespace {

void check_same_space(const HilbertSpace& a, const HilbertSpace& b,
                      const char* what) {
  if (!(a == b)) {
    std::ostringstream msg;
    msg << what << ": operands live on different Hilbert spaces (dims "
        << a.total_dim() << " vs " << b.total_dim() << ")";
    throw std::invalid_argument(msg.str());
  }
}

double max_asymmetry(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

HilbertSpace::HilbertSpace(std::vector<int> factors)
    : factors_(std::move(factors)) {
  if (factors_.empty()) {
    throw std::invalid_argument("HilbertSpace: factor list must be non-empty");
  }
  long long dim = 1;
  for (int f : factors_) {
    if (f < 2) {
      throw std::invalid_argument(
          "HilbertSpace: every factor dimension must be >= 2, got " +
          std::to_string(f));
    }
    dim *= f;
    if (dim > (1 << 24)) {
      throw std::invalid_argument(
          "HilbertSpace: total dimension too large for the dense backend");
    }
  }
  total_dim_ = static_cast<int>(dim);
}

bool HilbertSpace::all_qubits() const {
  return std::all_of(factors_.begin(), factors_.end(),
                     [](int f) { return f == 2; });
}

StateVector::StateVector(HilbertSpace space, Vector amplitudes)
    : space_(std::move(space)), amps_(std::move(amplitudes)) {
  if (amps_.size() != space_.total_dim()) {
    throw std::invalid_argument("StateVector: amplitude length " +
                                std::to_string(amps_.size()) +
                                " does not match space dimension " +
                                std::to_string(space_.total_dim()));
  }
  if (std::abs(amps_.norm() - 1.0) > kUnitaryTol) {
    throw std::invalid_argument(
        "StateVector: amplitudes are not normalized (norm = " +
        std::to_string(amps_.norm()) + "); use StateVector::normalized");
  }
}

StateVector StateVector::basis_state(const HilbertSpace& space, int index) {
  if (index < 0 || index >= space.total_dim()) {
    throw std::invalid_argument("basis_state: index " + std::to_string(index) +
                                " out of range for dimension " +
                                std::to_string(space.total_dim()));
  }
  Vector amps = Vector::Zero(space.total_dim());
  amps(index) = 1.0;
  return StateVector(space, std::move(amps));
}

StateVector StateVector::superposition(const HilbertSpace& space,
                                       const std::vector<int>& indices) {
  if (indices.empty()) {
    throw std::invalid_argument("superposition: no basis indices given");
  }
  Vector amps = Vector::Zero(space.total_dim());
  for (int idx : indices) {
    if (idx < 0 || idx >= space.total_dim()) {
      throw std::invalid_argument("superposition: index " +
                                  std::to_string(idx) +
                                  " out of range for dimension " +
                                  std::to_string(space.total_dim()));
    }
    amps(idx) += 1.0;
  }
  return normalized(space, std::move(amps));
}

StateVector StateVector::normalized(HilbertSpace space, Vector amplitudes) {
  const double n = amplitudes.norm();
  if (n == 0.0) {
    throw std::invalid_argument("normalized: zero amplitude vector");
  }
  return StateVector(std::move(space), amplitudes / n);
}

HermitianOperator::HermitianOperator(HilbertSpace space, Matrix matrix)
    : space_(std::move(space)), mat_(std::move(matrix)) {
  if (mat_.rows() != space_.total_dim() || mat_.cols() != space_.total_dim()) {
    throw std::invalid_argument(
        "HermitianOperator: matrix shape does not match space dimension " +
        std::to_string(space_.total_dim()));
  }
  const double asym = max_asymmetry(mat_);
  if (asym > kHermitianTol) {
    std::ostringstream msg;
    msg << "HermitianOperator: matrix is not Hermitian (max |A - A^dagger| = "
        << asym << ", tolerance " << kHermitianTol << ")";
    throw std::invalid_argument(msg.str());
  }
}

HermitianOperator::HermitianOperator(const HermitianOperator& other)
    : space_(other.space_), mat_(other.mat_) {
  std::lock_guard<std::mutex> lock(other.spectrum_mutex_);
  spectrum_ = other.spectrum_;
}

HermitianOperator& HermitianOperator::operator=(
    const HermitianOperator& other) {
  if (this == &other) return *this;
  space_ = other.space_;
  mat_ = other.mat_;
  std::shared_ptr<const Spectrum> snapshot;
  {
    std::lock_guard<std::mutex> lock(other.spectrum_mutex_);
    snapshot = other.spectrum_;
  }
  std::lock_guard<std::mutex> lock(spectrum_mutex_);
  spectrum_ = std::move(snapshot);
  return *this;
}

HermitianOperator::HermitianOperator(HermitianOperator&& other) noexcept
    : space_(std::move(other.space_)), mat_(std::move(other.mat_)) {
  std::lock_guard<std::mutex> lock(other.spectrum_mutex_);
  spectrum_ = std::move(other.spectrum_);
}

HermitianOperator& HermitianOperator::operator=(
    HermitianOperator&& other) noexcept {
  if (this == &other) return *this;
  space_ = std::move(other.space_);
  mat_ = std::move(other.mat_);
  std::shared_ptr<const Spectrum> snapshot;
  {
    std::lock_guard<std::mutex> lock(other.spectrum_mutex_);
    snapshot = std::move(other.spectrum_);
  }
  std::lock_guard<std::mutex> lock(spectrum_mutex_);
  spectrum_ = std::move(snapshot);
  return *this;
}

bool HermitianOperator::has_spectrum() const {
  std::lock_guard<std::mutex> lock(spectrum_mutex_);
  return spectrum_ != nullptr;
}

const Spectrum& HermitianOperator::spectrum() const {
  std::lock_guard<std::mutex> lock(spectrum_mutex_);
  if (!spectrum_) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(mat_);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("spectrum: eigendecomposition failed");
    }
    auto spec = std::make_shared<Spectrum>();
    spec->eigenvalues = solver.eigenvalues();
    spec->eigenvectors = solver.eigenvectors();
    spectrum_ = std::move(spec);
  }
  return *spectrum_;
}

DensityMatrix::DensityMatrix(HilbertSpace space, Matrix matrix)
    : space_(std::move(space)), mat_(std::move(matrix)) {
  if (mat_.rows() != space_.total_dim() || mat_.cols() != space_.total_dim()) {
    throw std::invalid_argument(
        "DensityMatrix: matrix shape does not match space dimension");
  }
  const double asym = max_asymmetry(mat_);
  if (asym > kHermitianTol) {
    throw std::invalid_argument(
        "DensityMatrix: matrix is not Hermitian (max asymmetry " +
        std::to_string(asym) + ")");
  }
  if (std::abs(mat_.trace().real() - 1.0) > kUnitaryTol ||
      std::abs(mat_.trace().imag()) > kUnitaryTol) {
    throw std::invalid_argument("DensityMatrix: trace must equal 1");
  }
}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi) {
  Matrix m = psi.amplitudes() * psi.amplitudes().adjoint();
  return DensityMatrix(psi.space(), std::move(m));
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(mat_);
  return solver.eigenvalues().minCoeff();
}

const Spectrum& hermitian_eigendecompose(const HermitianOperator& op) {
  return op.spectrum();
}

StateVector apply_exp(const HermitianOperator& term, double tau,
                      const StateVector& psi) {
  check_same_space(term.space(), psi.space(), "apply_exp");
  if (tau == 0.0) return psi;  // identity, bit-exact
  const Spectrum& spec = term.spectrum();
  Vector rotated = spec.eigenvectors.adjoint() * psi.amplitudes();
  for (Eigen::Index i = 0; i < rotated.size(); ++i) {
    const double phase = -spec.eigenvalues(i) * tau;
    rotated(i) *= Complex(std::cos(phase), std::sin(phase));
  }
  Vector out = spec.eigenvectors * rotated;
  return StateVector(psi.space(), std::move(out));
}

StateVector evolve_exact(const HermitianOperator& hamiltonian,
                         const StateVector& psi0, double t) {
  return apply_exp(hamiltonian, t, psi0);
}

double expectation(const HermitianOperator& op, const StateVector& psi) {
  check_same_space(op.space(), psi.space(), "expectation");
  const Complex value = psi.amplitudes().dot(op.matrix() * psi.amplitudes());
  return value.real();
}

std::pair<double, double> moments(const HermitianOperator& op,
                                  const StateVector& psi) {
  check_same_space(op.space(), psi.space(), "moments");
  // <A^2> = ||A psi||^2 for Hermitian A, so one matvec yields both moments.
  Vector applied = op.matrix() * psi.amplitudes();
  const double mean = psi.amplitudes().dot(applied).real();
  const double second = applied.squaredNorm();
  return {mean, second};
}

double variance(const HermitianOperator& op, const StateVector& psi) {
  const auto [mean, second] = moments(op, psi);
  double var = second - mean * mean;
  if (var < 0.0) {
    if (var < -kVarianceClampTol) {
      throw std::logic_error("variance: negative value " +
                             std::to_string(var) +
                             " beyond clamping tolerance");
    }
    var = 0.0;
  }
  return var;
}

double qfi(const HermitianOperator& generator, const StateVector& psi) {
  return 4.0 * variance(generator, psi);
}

double fidelity_pure(const StateVector& a, const StateVector& b) {
  check_same_space(a.space(), b.space(), "fidelity_pure");
  const double f = std::norm(a.amplitudes().dot(b.amplitudes()));
  return std::clamp(f, 0.0, 1.0);
}

double fidelity_pure_mixed(const StateVector& psi, const DensityMatrix& rho) {
  check_same_space(psi.space(), rho.space(), "fidelity_pure_mixed");
  const Complex value = psi.amplitudes().dot(rho.matrix() * psi.amplitudes());
  return std::clamp(value.real(), 0.0, 1.0);
}

double spectral_norm(const HermitianOperator& op) {
  const Spectrum& spec = op.spectrum();
  return spec.eigenvalues.cwiseAbs().maxCoeff();
}

Matrix embed_matrix(const Matrix& local, int site, const HilbertSpace& space) {
  if (site < 0 || site >= space.num_factors()) {
    throw std::invalid_argument("embed_matrix: site " + std::to_string(site) +
                                " out of range");
  }
  const int d = space.factor(site);
  if (local.rows() != d || local.cols() != d) {
    throw std::invalid_argument(
        "embed_matrix: local dimension " + std::to_string(local.rows()) +
        " does not match factor dimension " + std::to_string(d) + " at site " +
        std::to_string(site));
  }
  int left = 1;
  int right = 1;
  for (int s = 0; s < site; ++s) left *= space.factor(s);
  for (int s = site + 1; s < space.num_factors(); ++s) right *= space.factor(s);

  const int dim = space.total_dim();
  Matrix out = Matrix::Zero(dim, dim);
  // Index layout: flat = (l * d + k) * right + r with factor 0 leftmost.
  for (int l = 0; l < left; ++l) {
    for (int row = 0; row < d; ++row) {
      for (int col = 0; col < d; ++col) {
        const Complex v = local(row, col);
        if (v == Complex(0.0, 0.0)) continue;
        const int base_row = (l * d + row) * right;
        const int base_col = (l * d + col) * right;
        for (int r = 0; r < right; ++r) {
          out(base_row + r, base_col + r) = v;
        }
      }
    }
  }
  return out;
}

HermitianOperator tensor_embed(const Matrix& local, int site,
                               const HilbertSpace& space) {
  return HermitianOperator(space, embed_matrix(local, site, space));
}

}  // namespace rcsim
