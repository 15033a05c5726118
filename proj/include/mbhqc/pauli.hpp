// Copyright 2026 The mbhqc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mbhqc {

/// Largest qubit count for which dense (2^n-dimensional) objects are built.
inline constexpr std::size_t kDefaultDenseLimit = 12;

/// An n-qubit Pauli operator i^phase * (sigma_1 (x) ... (x) sigma_n).
///
/// Each qubit carries a symplectic pair (x, z): (0,0)=I, (1,0)=X, (1,1)=Y,
/// (0,1)=Z. The phase is relative to the tensor product of the Hermitian
/// single-qubit matrices, so a Pauli is Hermitian iff its phase is even.
/// Bits are packed 64 qubits per word.
class PauliOperator {
 public:
  PauliOperator() = default;
  /// Identity on n qubits.
  explicit PauliOperator(std::size_t n);

  /// Parses strings like "XZI", "-XZI", "+YY", "iXZ", "-iZ".
  static PauliOperator parse(std::string_view text);
  /// Single-qubit Pauli `kind` in {'I','X','Y','Z'} on `qubit` (0-based).
  static PauliOperator single(std::size_t n, std::size_t qubit, char kind);
  /// Product of single-qubit terms, e.g. sparse(9, {{0,'X'},{3,'X'},{6,'X'}}).
  static PauliOperator sparse(std::size_t n, std::initializer_list<std::pair<std::size_t, char>> terms);

  std::size_t num_qubits() const { return n_; }
  int phase_power() const { return phase_; }
  bool x(std::size_t q) const;
  bool z(std::size_t q) const;
  char kind(std::size_t q) const;

  std::size_t weight() const;
  std::vector<std::size_t> support() const;
  bool is_hermitian() const { return (phase_ & 1) == 0; }
  /// True when every qubit carries I, regardless of phase.
  bool is_identity_up_to_phase() const;
  bool equal_up_to_phase(const PauliOperator& other) const;

  /// Same bit pattern with phase replaced by `power` (mod 4).
  PauliOperator with_phase(int power) const;
  PauliOperator inverse() const { return with_phase(-phase_); }
  PauliOperator operator-() const { return with_phase(phase_ + 2); }

  /// Tensor product this (x) other, with this occupying the leading qubits.
  PauliOperator tensor(const PauliOperator& other) const;

  /// Low 64 qubits as bit masks in state-vector index convention, where qubit
  /// 0 is the most significant bit of an n-bit basis index.
  std::uint64_t x_index_mask() const;
  std::uint64_t z_index_mask() const;
  /// Number of qubits carrying Y.
  std::size_t y_count() const;

  std::string to_string() const;

  friend PauliOperator operator*(const PauliOperator& a, const PauliOperator& b);
  friend bool operator==(const PauliOperator& a, const PauliOperator& b) = default;

  const std::vector<std::uint64_t>& x_words() const { return xs_; }
  const std::vector<std::uint64_t>& z_words() const { return zs_; }

 private:
  std::size_t n_ = 0;
  int phase_ = 0;
  std::vector<std::uint64_t> xs_;
  std::vector<std::uint64_t> zs_;

  void set(std::size_t q, bool xb, bool zb);
};

PauliOperator multiply(const PauliOperator& a, const PauliOperator& b);

/// Symplectic test: a.x.b.z + a.z.b.x == 0 (mod 2).
bool commutes(const PauliOperator& a, const PauliOperator& b);
inline bool anticommutes(const PauliOperator& a, const PauliOperator& b) { return !commutes(a, b); }

std::size_t weight(const PauliOperator& a);

/// Exact 2^n x 2^n matrix (qubit 0 is the leftmost Kronecker factor).
Eigen::MatrixXcd to_dense(const PauliOperator& a, std::size_t dense_limit = kDefaultDenseLimit);

/// out += coeff * P * in, for state vectors of dimension 2^n (n <= 63).
void apply_pauli_add(const PauliOperator& p, std::complex<double> coeff, const std::complex<double>* in,
                     std::complex<double>* out);

/// Complex value of i^power.
std::complex<double> i_pow(int power);

/// Visits every Pauli on n qubits with the given weight, identity phase,
/// in lexicographic order over the string representation with I<X<Y<Z.
/// Returning false from `visit` stops the enumeration.
void for_each_pauli_of_weight(std::size_t n, std::size_t w,
                              const std::function<bool(const PauliOperator&)>& visit);

struct PauliHash {
  std::size_t operator()(const PauliOperator& p) const noexcept;
};

}  // namespace mbhqc
