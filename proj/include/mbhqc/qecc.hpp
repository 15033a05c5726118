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

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mbhqc/codes.hpp"
#include "mbhqc/pauli.hpp"

namespace mbhqc {

/// A set of Pauli errors containing the identity.
struct CorrectableSet {
  std::vector<PauliOperator> errors;
  std::size_t max_weight = 0;

  /// {I} together with every Pauli of weight 1..w on n qubits.
  static CorrectableSet up_to_weight(std::size_t n, std::size_t w);
  /// Default for a distance-d code: weight up to floor((d-1)/2).
  static CorrectableSet for_code(const StabilizerCode& code);
};

/// Products E_a E_b over all pairs, phases dropped and duplicates removed.
std::vector<PauliOperator> pair_products(const CorrectableSet& set);

/// Number of distinct syndromes among `ops`.
std::size_t distinct_syndromes(const StabilizerCode& code, const std::vector<PauliOperator>& ops);

// ---------------------------------------------------------------------------

struct KlResult {
  bool passed = false;
  Eigen::MatrixXcd gamma;
  /// First pair (b, a) violating proportionality.
  std::optional<std::pair<std::size_t, std::size_t>> violation;
  double max_residual = 0.0;
};

/// Checks P0 Eb^dag Ea P0 = gamma_ab P0 for every pair. Works on the code basis L
/// (P0 = L L^dag), where the condition reads L^dag Eb^dag Ea L = gamma_ab I.
KlResult kl_check(const StabilizerCode& code, const CorrectableSet& set, double tol = 1e-10,
                  std::size_t dense_limit = kDefaultDenseLimit);

/// Dense check of the same condition for the rotated code V(phi) P0 V^dag(phi)
/// of the path exp(i theta phi/2pi H) exp(i phi X), at each phi in `phis`.
struct RotatedKlResult {
  bool passed = false;
  double max_residual = 0.0;
  std::vector<double> phis;
  std::vector<double> residual_per_phi;
};
RotatedKlResult rotated_kl_check(const StabilizerCode& code, const PauliOperator& h, const PauliOperator& x,
                                 double theta, const CorrectableSet& set, const std::vector<double>& phis,
                                 double tol = 1e-9, std::size_t dense_limit = kDefaultDenseLimit);

// ---------------------------------------------------------------------------

/// Commutation case of D against (H, X) and the operators V^dag D V combines.
struct ConjugationSpan {
  int case_number = 1;  // 1: [H,D]=[X,D]=0, 2: [H,D]={X,D}=0, 3: {H,D}=[X,D]=0, 4: {H,D}={X,D}=0
  std::vector<PauliOperator> operators;
};
ConjugationSpan classify_conjugation(const PauliOperator& d, const PauliOperator& h, const PauliOperator& x);

enum class Clause { kWeight, kStabilizer, kLogical };
std::string to_string(Clause c);

struct Violation {
  PauliOperator d;
  int case_number;
  Clause clause;
};

struct ConditionReport {
  bool passed = false;
  bool weight_ok = false;
  bool stabilizer_ok = true;
  bool logical_ok = true;
  std::vector<Violation> violations;
};

/// Sufficient conditions for every rotated code to correct `set`:
/// weight(X) > d-1; stabilizers X D within reach anticommute with X; logicals
/// X D within reach commute with X and anticommute with H. "Within reach"
/// means D ranges over pair products of the correctable set.
ConditionReport sufficient_conditions_check(const StabilizerCode& code, const PauliOperator& h, const PauliOperator& x,
                               const CorrectableSet& set);

/// Hamming radius used by the distance clauses: d-1 for odd d, d-2 for even d.
std::size_t clause_radius(std::size_t d);

// ---------------------------------------------------------------------------

enum class LogicalPairStatus { kProportional, kExcludedIdentity, kNotInvolved, kViolation };
std::string to_string(LogicalPairStatus s);

struct LogicalPairEntry {
  PauliOperator d;
  bool anticommutes_with_h;
  bool zero_syndrome;
  bool stabilizer;
  double residual;  // || L^dag H D L - gamma I ||_F with the best gamma
  LogicalPairStatus status;
};

struct LogicalPairReport {
  bool passed = false;
  std::vector<LogicalPairEntry> entries;
};

/// Dense check that P0 H D P0 is proportional to P0 for the pair products D.
/// H D enters the rotated errors only when {H, D} = 0, so D commuting with H is
/// reported as not involved, and D = I as the excluded identity pair.
LogicalPairReport logical_pair_check(const StabilizerCode& code, const PauliOperator& h, const CorrectableSet& set,
                        double tol = 1e-10, std::size_t dense_limit = kDefaultDenseLimit);

// ---------------------------------------------------------------------------

struct SearchOptions {
  std::size_t candidate_cap = 1'000'000;
  std::size_t max_results = 0;  // 0 = no limit
  unsigned threads = 0;
};

struct SearchResult {
  std::vector<PauliOperator> valid;
  std::size_t candidates_examined = 0;
  bool truncated = false;
};

/// Hermitian X by increasing weight (lexicographic within a weight, I<X<Y<Z)
/// that anticommute with H and with some generator and pass sufficient_conditions_check.
SearchResult search_x(const StabilizerCode& code, const PauliOperator& h, const CorrectableSet& set,
                      const SearchOptions& options = {});

struct AncillaRequirement {
  std::size_t d_e = 0;
  std::size_t d_e2 = 0;
  std::size_t num_syndromes = 0;  // 2^(n-k)
  int s = 0;
};
AncillaRequirement ancilla_requirement(const StabilizerCode& code, const CorrectableSet& set);

struct AugmentedCode {
  StabilizerCode code;
  PauliOperator h;
  PauliOperator x;
  CorrectableSet errors;  // weight <= 1 on all data and ancilla qubits
};

/// Appends s in {1, 2} ancillas in |0> (each with a Z stabilizer), H -> H (x) I,
/// X -> X (x) X on every ancilla.
AugmentedCode augment_code(const StabilizerCode& code, int s, const PauliOperator& h, const PauliOperator& x);

}  // namespace mbhqc
