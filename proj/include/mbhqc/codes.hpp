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

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mbhqc/pauli.hpp"

namespace mbhqc {

/// Commutation pattern of a Pauli against the generators: bit i is set iff the
/// operator anticommutes with generator i.
class Syndrome {
 public:
  Syndrome() = default;
  explicit Syndrome(std::size_t size) : size_(size) {}

  std::size_t size() const { return size_; }
  bool operator[](std::size_t i) const { return (bits_ >> i) & 1U; }
  void set(std::size_t i, bool v) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    bits_ = v ? (bits_ | bit) : (bits_ & ~bit);
  }
  bool is_zero() const { return bits_ == 0; }
  std::uint64_t packed() const { return bits_; }

  Syndrome operator^(const Syndrome& o) const {
    Syndrome s(size_);
    s.bits_ = bits_ ^ o.bits_;
    return s;
  }
  friend bool operator==(const Syndrome&, const Syndrome&) = default;

  std::string to_string() const;

 private:
  std::size_t size_ = 0;
  std::uint64_t bits_ = 0;
};

/// An [[n,k,d]] stabilizer code with explicit generators and logical Paulis.
/// Construction validates commutation relations and generator independence.
class StabilizerCode {
 public:
  StabilizerCode(std::string name, std::size_t n, std::size_t k, std::size_t d,
                 std::vector<PauliOperator> generators, std::vector<PauliOperator> logical_x,
                 std::vector<PauliOperator> logical_z);

  const std::string& name() const { return name_; }
  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  std::size_t d() const { return d_; }
  const std::vector<PauliOperator>& generators() const { return generators_; }
  const std::vector<PauliOperator>& logical_x() const { return logical_x_; }
  const std::vector<PauliOperator>& logical_z() const { return logical_z_; }
  std::size_t num_generators() const { return generators_.size(); }

  /// Same code with a different generator set (validated to span the same group).
  StabilizerCode with_generators(std::vector<PauliOperator> generators) const;

  /// Loads {n, k, d, generators, logical_x, logical_z[, name]}.
  static StabilizerCode from_json_text(std::string_view text);
  static StabilizerCode from_json_file(const std::string& path);
  std::string to_json_text() const;

 private:
  std::string name_;
  std::size_t n_, k_, d_;
  std::vector<PauliOperator> generators_;
  std::vector<PauliOperator> logical_x_;
  std::vector<PauliOperator> logical_z_;
};

using CodePtr = std::shared_ptr<const StabilizerCode>;

Syndrome syndrome(const StabilizerCode& code, const PauliOperator& p);

/// Rank of a set of Paulis over GF(2) in the symplectic representation.
std::size_t symplectic_rank(const std::vector<PauliOperator>& ops);

/// True when `p` equals +/- a product of generators.
bool in_stabilizer_group(const StabilizerCode& code, const PauliOperator& p);

/// All 2^(n-k) products of generators (identity first), with signs as produced
/// by the multiplication.
std::vector<PauliOperator> stabilizer_group(const StabilizerCode& code);

/// Dense projector prod_j (I + g_j)/2 onto the code space.
Eigen::MatrixXcd code_projector(const StabilizerCode& code, std::size_t dense_limit = kDefaultDenseLimit);

/// 2^n x 2^k isometry whose columns are the logical computational basis
/// |j> = prod_i Xbar_i^{j_i} |0bar>, with |0bar> the +1 eigenvector of every
/// Zbar_i. The phase of |0bar> is fixed by making its largest-magnitude
/// amplitude (lowest index on ties) real and positive.
Eigen::MatrixXcd code_basis(const StabilizerCode& code, std::size_t dense_limit = kDefaultDenseLimit);

/// Builtin codes: bitflip3, shor9, steane7, perfect5.
StabilizerCode builtin_code(std::string_view name);
std::vector<std::string> builtin_code_names();

/// Rewrites the generators as {g_1, g_1 g_2, ..., g_1 g_l, g_{l+1}, ...} so that
/// exactly one generator (placed first) anticommutes with `x`.
std::vector<PauliOperator> transform_generators(const StabilizerCode& code, const PauliOperator& x);

}  // namespace mbhqc
