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

#include "rcsim/shadows.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rcsim {

namespace {

// Basis-change unitaries mapping the measurement basis onto the
// computational one: Hadamard for X, (H S^dagger) for Y.
Matrix basis_rotation(PauliLetter basis) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Matrix m(2, 2);
  switch (basis) {
    case PauliLetter::X:
      m << inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2;
      return m;
    case PauliLetter::Y:
      m << Complex(inv_sqrt2, 0), Complex(0, -inv_sqrt2), Complex(inv_sqrt2, 0),
          Complex(0, inv_sqrt2);
      return m;
    case PauliLetter::Z:
      return Matrix::Identity(2, 2);
    default:
      throw std::logic_error("basis_rotation: identity is not a basis");
  }
}

// In-place single-qubit gate on qubit q of an n-qubit register flattened
// with qubit 0 most significant.
void apply_single_qubit(Vector& amps, int n_qubits, int qubit,
                        const Matrix& gate) {
  const int bit = n_qubits - 1 - qubit;
  const int stride = 1 << bit;
  const int dim = static_cast<int>(amps.size());
  for (int base = 0; base < dim; base += 2 * stride) {
    for (int offset = 0; offset < stride; ++offset) {
      const int i0 = base + offset;
      const int i1 = i0 + stride;
      const Complex a0 = amps(i0);
      const Complex a1 = amps(i1);
      amps(i0) = gate(0, 0) * a0 + gate(0, 1) * a1;
      amps(i1) = gate(1, 0) * a0 + gate(1, 1) * a1;
    }
  }
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Per-snapshot product estimate for a string given by its non-identity
// (qubit, letter) pairs.
double snapshot_product(const Snapshot& snap,
                        const std::vector<std::pair<int, PauliLetter>>& sites) {
  double product = 1.0;
  for (const auto& [q, letter] : sites) {
    if (snap.bases[static_cast<size_t>(q)] != letter) return 0.0;
    product *= snap.outcomes[static_cast<size_t>(q)] ? -3.0 : 3.0;
  }
  return product;
}

std::vector<std::pair<int, PauliLetter>> non_identity_sites(
    const std::vector<PauliLetter>& letters) {
  std::vector<std::pair<int, PauliLetter>> sites;
  for (int q = 0; q < static_cast<int>(letters.size()); ++q) {
    if (letters[static_cast<size_t>(q)] != PauliLetter::I) {
      sites.emplace_back(q, letters[static_cast<size_t>(q)]);
    }
  }
  return sites;
}

void check_batching(size_t n_snapshots, int mom_batches, const char* what) {
  if (n_snapshots == 0) {
    throw std::invalid_argument(std::string(what) + ": empty shadow set");
  }
  if (mom_batches < 1 ||
      n_snapshots % static_cast<size_t>(mom_batches) != 0) {
    throw std::invalid_argument(
        std::string(what) + ": mom_batches (" + std::to_string(mom_batches) +
        ") must divide the snapshot count (" + std::to_string(n_snapshots) +
        ")");
  }
}

}  // namespace

Snapshot sample_snapshot(const StateVector& psi, Rng& rng) {
  const HilbertSpace& space = psi.space();
  if (!space.all_qubits()) {
    throw std::invalid_argument(
        "sample_snapshot: randomized Pauli measurements need a pure qubit "
        "register");
  }
  const int n = space.num_factors();

  Snapshot snap;
  snap.bases.resize(static_cast<size_t>(n));
  snap.outcomes.resize(static_cast<size_t>(n));

  Vector rotated = psi.amplitudes();
  for (int q = 0; q < n; ++q) {
    const auto basis =
        static_cast<PauliLetter>(1 + static_cast<int>(rng.uniform_index(3)));
    snap.bases[static_cast<size_t>(q)] = basis;
    if (basis != PauliLetter::Z) {
      apply_single_qubit(rotated, n, q, basis_rotation(basis));
    }
  }

  // Born sampling of the rotated state.
  const double u = rng.uniform();
  double cumulative = 0.0;
  int outcome_index = static_cast<int>(rotated.size()) - 1;
  for (int i = 0; i < static_cast<int>(rotated.size()); ++i) {
    cumulative += std::norm(rotated(i));
    if (u < cumulative) {
      outcome_index = i;
      break;
    }
  }
  for (int q = 0; q < n; ++q) {
    snap.outcomes[static_cast<size_t>(q)] =
        static_cast<std::uint8_t>((outcome_index >> (n - 1 - q)) & 1);
  }
  return snap;
}

ShadowSet sample_shadow_set(const StateVector& psi, int n_shots, Rng& rng,
                            std::uint64_t source_seed) {
  if (n_shots <= 0) {
    throw std::invalid_argument("sample_shadow_set: n_shots must be positive");
  }
  ShadowSet set;
  set.source_seed = source_seed;
  set.snapshots.reserve(static_cast<size_t>(n_shots));
  for (int i = 0; i < n_shots; ++i) {
    set.snapshots.push_back(sample_snapshot(psi, rng));
  }
  return set;
}

double estimate_pauli(const ShadowSet& shadow, const PauliString& p,
                      int mom_batches) {
  check_batching(shadow.snapshots.size(), mom_batches, "estimate_pauli");
  if (static_cast<int>(p.letters.size()) != shadow.num_qubits()) {
    throw std::invalid_argument(
        "estimate_pauli: string length does not match the shadow's qubit "
        "count");
  }
  const auto sites = non_identity_sites(p.letters);
  if (sites.empty()) return 1.0;  // identity string: empty product

  const size_t batch_size = shadow.snapshots.size() /
                            static_cast<size_t>(mom_batches);
  std::vector<double> batch_means;
  batch_means.reserve(static_cast<size_t>(mom_batches));
  size_t cursor = 0;
  for (int b = 0; b < mom_batches; ++b) {
    double sum = 0.0;
    for (size_t i = 0; i < batch_size; ++i, ++cursor) {
      sum += snapshot_product(shadow.snapshots[cursor], sites);
    }
    batch_means.push_back(sum / static_cast<double>(batch_size));
  }
  return mom_batches == 1 ? batch_means.front() : median_of(batch_means);
}

std::pair<Complex, PauliString> pauli_product(const PauliString& a,
                                              const PauliString& b) {
  if (a.letters.size() != b.letters.size()) {
    throw std::invalid_argument("pauli_product: length mismatch");
  }
  Complex phase(1.0, 0.0);
  PauliString out;
  out.coefficient = 1.0;
  out.letters.resize(a.letters.size());
  for (size_t q = 0; q < a.letters.size(); ++q) {
    const int la = static_cast<int>(a.letters[q]);
    const int lb = static_cast<int>(b.letters[q]);
    if (la == 0) {
      out.letters[q] = b.letters[q];
    } else if (lb == 0) {
      out.letters[q] = a.letters[q];
    } else if (la == lb) {
      out.letters[q] = PauliLetter::I;
    } else {
      // XY = iZ, YZ = iX, ZX = iY; reversed order picks up -i.
      out.letters[q] = static_cast<PauliLetter>(6 - la - lb);
      const bool cyclic = (la == 1 && lb == 2) || (la == 2 && lb == 3) ||
                          (la == 3 && lb == 1);
      phase *= cyclic ? Complex(0.0, 1.0) : Complex(0.0, -1.0);
    }
  }
  return {phase, out};
}

ShadowMoments estimate_term_moments(const ShadowSet& shadow,
                                    const std::vector<PauliString>& term_paulis,
                                    const ShadowConfig& config) {
  if (term_paulis.empty()) {
    throw std::invalid_argument(
        "estimate_term_moments: empty Pauli decomposition");
  }
  const int K = config.mom_batches;
  check_batching(shadow.snapshots.size(), K, "estimate_term_moments");

  const size_t n_strings = term_paulis.size();
  // Deterministic second-moment contribution: each diagonal product
  // P_l P_l is the identity string.
  double m2_constant = 0.0;
  for (const PauliString& p : term_paulis) {
    m2_constant += p.coefficient * p.coefficient;
  }

  // Off-diagonal products collapse to single strings; the symmetric l<->m
  // sum keeps only the real part of the phase, so +-i phases drop out
  // without being estimated.
  std::map<std::string, std::pair<std::vector<PauliLetter>, double>> products;
  for (size_t l = 0; l < n_strings; ++l) {
    for (size_t m = l + 1; m < n_strings; ++m) {
      const auto [phase, str] = pauli_product(term_paulis[l], term_paulis[m]);
      if (std::abs(phase.real()) < 1e-15) continue;
      const double coeff = 2.0 * term_paulis[l].coefficient *
                           term_paulis[m].coefficient * phase.real();
      auto [it, inserted] = products.try_emplace(
          str.letters_str(), std::make_pair(str.letters, 0.0));
      it->second.second += coeff;
    }
  }

  struct EstTask {
    std::vector<std::pair<int, PauliLetter>> sites;
    double mean_coeff = 0.0;  // weight in <H>
    double m2_coeff = 0.0;    // weight in <H^2>
  };
  std::map<std::string, EstTask> tasks;
  for (const PauliString& p : term_paulis) {
    auto& task = tasks[p.letters_str()];
    task.sites = non_identity_sites(p.letters);
    task.mean_coeff += p.coefficient;
  }
  for (const auto& [key, entry] : products) {
    auto& task = tasks[key];
    task.sites = non_identity_sites(entry.first);
    task.m2_coeff += entry.second;
  }

  const size_t batch_size = shadow.snapshots.size() / static_cast<size_t>(K);
  std::vector<double> mean_b(static_cast<size_t>(K), 0.0);
  std::vector<double> m2_b(static_cast<size_t>(K), m2_constant);
  for (const auto& [key, task] : tasks) {
    if (task.sites.empty()) {
      // Identity string: contributes its coefficient exactly.
      for (int b = 0; b < K; ++b) {
        mean_b[static_cast<size_t>(b)] += task.mean_coeff;
        m2_b[static_cast<size_t>(b)] += task.m2_coeff;
      }
      continue;
    }
    size_t cursor = 0;
    for (int b = 0; b < K; ++b) {
      double sum = 0.0;
      for (size_t i = 0; i < batch_size; ++i, ++cursor) {
        sum += snapshot_product(shadow.snapshots[cursor], task.sites);
      }
      const double est = sum / static_cast<double>(batch_size);
      mean_b[static_cast<size_t>(b)] += task.mean_coeff * est;
      m2_b[static_cast<size_t>(b)] += task.m2_coeff * est;
    }
  }

  ShadowMoments result;
  if (K == 1) {
    result.mean = mean_b.front();
    result.second_moment = m2_b.front();
    result.variance_se = 0.0;
    return result;
  }
  result.mean = median_of(mean_b);
  result.second_moment = median_of(m2_b);

  std::vector<double> var_b(static_cast<size_t>(K));
  for (int b = 0; b < K; ++b) {
    var_b[static_cast<size_t>(b)] =
        m2_b[static_cast<size_t>(b)] -
        mean_b[static_cast<size_t>(b)] * mean_b[static_cast<size_t>(b)];
  }
  double acc = 0.0;
  for (double v : var_b) acc += v;
  const double var_mean = acc / static_cast<double>(K);
  double ss = 0.0;
  for (double v : var_b) ss += (v - var_mean) * (v - var_mean);
  const double batch_std = std::sqrt(ss / static_cast<double>(K - 1));
  result.variance_se = batch_std / std::sqrt(static_cast<double>(K));
  return result;
}

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, 8);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

constexpr char kMagic[4] = {'R', 'C', 'S', 'H'};
constexpr std::uint32_t kFormatVersion = 1;

char basis_byte(PauliLetter l) {
  switch (l) {
    case PauliLetter::X: return 'X';
    case PauliLetter::Y: return 'Y';
    case PauliLetter::Z: return 'Z';
    default: throw std::logic_error("basis_byte: invalid basis");
  }
}

PauliLetter basis_from_byte(char c) {
  switch (c) {
    case 'X': return PauliLetter::X;
    case 'Y': return PauliLetter::Y;
    case 'Z': return PauliLetter::Z;
    default:
      throw std::runtime_error("shadow stream: invalid basis byte");
  }
}

}  // namespace

void write_shadow_set(std::ostream& out, const ShadowSet& shadow) {
  out.write(kMagic, 4);
  write_u32(out, kFormatVersion);
  write_u64(out, shadow.source_seed);
  write_u32(out, static_cast<std::uint32_t>(shadow.num_qubits()));
  write_u64(out, shadow.snapshots.size());
  for (const Snapshot& snap : shadow.snapshots) {
    for (size_t q = 0; q < snap.bases.size(); ++q) {
      const char pair[2] = {basis_byte(snap.bases[q]),
                            static_cast<char>(snap.outcomes[q])};
      out.write(pair, 2);
    }
  }
}

ShadowSet read_shadow_set(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("shadow stream: bad magic");
  }
  const std::uint32_t version = read_u32(in);
  if (version != kFormatVersion) {
    throw std::runtime_error("shadow stream: unsupported version " +
                             std::to_string(version));
  }
  ShadowSet set;
  set.source_seed = read_u64(in);
  const std::uint32_t n_qubits = read_u32(in);
  const std::uint64_t n_snapshots = read_u64(in);
  set.snapshots.resize(n_snapshots);
  for (std::uint64_t s = 0; s < n_snapshots; ++s) {
    Snapshot& snap = set.snapshots[s];
    snap.bases.resize(n_qubits);
    snap.outcomes.resize(n_qubits);
    for (std::uint32_t q = 0; q < n_qubits; ++q) {
      char pair[2];
      in.read(pair, 2);
      snap.bases[q] = basis_from_byte(pair[0]);
      if (pair[1] != 0 && pair[1] != 1) {
        throw std::runtime_error("shadow stream: invalid outcome byte");
      }
      snap.outcomes[q] = static_cast<std::uint8_t>(pair[1]);
    }
  }
  if (!in) throw std::runtime_error("shadow stream: truncated input");
  return set;
}

void save_shadow_set(const std::string& path, const ShadowSet& shadow) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_shadow_set: cannot open " + path);
  write_shadow_set(out, shadow);
  if (!out) throw std::runtime_error("save_shadow_set: write failed: " + path);
}

ShadowSet load_shadow_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_shadow_set: cannot open " + path);
  return read_shadow_set(in);
}

}  // namespace rcsim
