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
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mbhqc/codes.hpp"
#include "mbhqc/pauli.hpp"

namespace mbhqc {

using cplx = std::complex<double>;

/// Dense 2^n amplitude vector. Qubit 0 is the most significant index bit.
class StateVector {
 public:
  StateVector() = default;
  /// |0...0> on n qubits.
  explicit StateVector(std::size_t n);
  /// Normalizes the given amplitudes; throws if their norm vanishes.
  StateVector(std::size_t n, std::vector<cplx> amplitudes);

  static StateVector basis(std::size_t n, std::size_t index);
  static StateVector from_eigen(std::size_t n, const Eigen::VectorXcd& v);

  std::size_t num_qubits() const { return n_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const cplx> amplitudes() const { return amps_; }
  std::span<cplx> amplitudes() { return amps_; }
  cplx operator[](std::size_t i) const { return amps_[i]; }
  Eigen::VectorXcd to_eigen() const;

  double norm() const;
  /// Returns the norm before rescaling.
  double normalize();

  /// psi <- P psi.
  void apply(const PauliOperator& p);
  /// psi <- exp(i angle P) psi = cos(angle) psi + i sin(angle) P psi; P must be Hermitian.
  void apply_rotation(const PauliOperator& p, double angle);
  /// <psi|P|psi>.
  cplx expectation(const PauliOperator& p) const;

 private:
  std::size_t n_ = 0;
  std::vector<cplx> amps_;
};

cplx inner(const StateVector& a, const StateVector& b);

/// |<a|b>|^2 for normalized states.
double fidelity(const StateVector& a, const StateVector& b);

/// Free-function form of StateVector::apply_rotation.
void pauli_rotation(const PauliOperator& p, double angle, StateVector& psi);

/// Pauli with precomputed index masks for repeated application.
struct CompiledPauli {
  std::uint64_t x_mask = 0;
  std::uint64_t z_mask = 0;
  cplx phase{1.0, 0.0};  // includes the i^{#Y} factor

  explicit CompiledPauli(const PauliOperator& p);
  CompiledPauli() = default;
  /// out += coeff * P * in.
  void apply_add(cplx coeff, std::span<const cplx> in, std::span<cplx> out) const;
};

/// sum_k c_k P_k with P_k stored at phase 0 and distinct bit patterns.
class PauliSum {
 public:
  struct Term {
    cplx coeff;
    PauliOperator op;
  };

  PauliSum() = default;
  explicit PauliSum(const PauliOperator& p);

  std::size_t num_qubits() const { return terms_.empty() ? 0 : terms_.front().op.num_qubits(); }
  const std::vector<Term>& terms() const { return terms_; }

  void add(cplx coeff, const PauliOperator& p);
  /// e^{i a Q} S e^{-i a Q} for Hermitian Q.
  PauliSum conjugated_by_rotation(const PauliOperator& q, double angle) const;
  PauliSum operator*(const PauliSum& other) const;

  /// out += coeff * S * in.
  void apply_add(cplx coeff, std::span<const cplx> in, std::span<cplx> out) const;
  StateVector apply(const StateVector& psi) const;
  Eigen::MatrixXcd to_dense() const;

 private:
  std::vector<Term> terms_;
};

/// One factor exp(i angle P) of a unitary program.
struct PauliRotation {
  PauliOperator axis;
  double angle = 0.0;
};

/// e^{i global_phase} R_m ... R_2 R_1, where steps[0] = R_1 acts first.
class UnitaryProgram {
 public:
  UnitaryProgram() = default;
  explicit UnitaryProgram(std::vector<PauliRotation> steps, double global_phase = 0.0)
      : steps_(std::move(steps)), global_phase_(global_phase) {}

  const std::vector<PauliRotation>& steps() const { return steps_; }
  double global_phase() const { return global_phase_; }

  UnitaryProgram& then_rotate(const PauliOperator& axis, double angle);
  /// Appends the Pauli P itself as exp(i pi/2 P) with a -pi/2 global phase.
  UnitaryProgram& then_pauli(const PauliOperator& p);
  /// this followed by `next`.
  UnitaryProgram& then(const UnitaryProgram& next);
  UnitaryProgram inverse() const;

  void apply(StateVector& psi) const;
  void apply_inverse(StateVector& psi) const;
  /// U P U^dagger as a Pauli sum.
  PauliSum conjugate(const PauliOperator& p) const;
  Eigen::MatrixXcd to_dense(std::size_t n) const;

 private:
  std::vector<PauliRotation> steps_;
  double global_phase_ = 0.0;
};

/// Product of commuting factors (I + O_j)/2 where each O_j is a Hermitian
/// involution given as a Pauli sum (a rotated signed Pauli).
class ProjectorProgram {
 public:
  ProjectorProgram() = default;
  explicit ProjectorProgram(std::vector<PauliSum> observables) : observables_(std::move(observables)) {}

  /// prod_j (I + g_j)/2 for the code generators.
  static ProjectorProgram code_space(const StabilizerCode& code);
  /// prod_j (I + s_j g_j)/2, s_j = -1 where g_j anticommutes with `error`: the
  /// projector error P0 error.
  static ProjectorProgram error_space(const StabilizerCode& code, const PauliOperator& error);
  /// Every observable conjugated by `frame`: U P U^dagger.
  ProjectorProgram rotated(const UnitaryProgram& frame) const;

  const std::vector<PauliSum>& observables() const { return observables_; }
  void add(PauliSum observable) { observables_.push_back(std::move(observable)); }

  /// psi <- P psi (no renormalization).
  void apply(StateVector& psi) const;
  Eigen::MatrixXcd to_dense(std::size_t n) const;

 private:
  std::vector<PauliSum> observables_;
};

/// U(angles) g U(angles)^dagger for a frame U = R_m(a_m) ... R_1(a_1) with
/// fixed rotation axes and variable angles. The Pauli expansion is built once;
/// each evaluation only recomputes trigonometric coefficients.
class RotatingObservable {
 public:
  RotatingObservable(const PauliOperator& g, std::vector<PauliOperator> axes);

  std::size_t num_axes() const { return num_axes_; }
  std::size_t num_patterns() const { return patterns_.size(); }

  /// Coefficients of the distinct Pauli patterns at the given angles.
  void coefficients(std::span<const double> angles, std::vector<cplx>& out) const;
  /// Same, from precomputed cos(2 a_k) and sin(2 a_k); `out` must hold num_patterns() entries.
  void coefficients_trig(const double* cos2, const double* sin2, cplx* out) const;
  /// out = O psi at the given angles (out is overwritten).
  void apply(std::span<const double> angles, std::span<const cplx> in, std::span<cplx> out) const;
  /// Same with coefficients precomputed by coefficients().
  void apply_with(const std::vector<cplx>& coeffs, std::span<const cplx> in, std::span<cplx> out) const;
  void apply_with(const cplx* coeffs, std::span<const cplx> in, std::span<cplx> out) const;
  PauliSum to_sum(std::span<const double> angles) const;

 private:
  enum class Factor : std::uint8_t { kOne, kCos, kMinusISin };
  struct Term {
    cplx constant;
    std::size_t pattern;
    std::vector<Factor> factors;
  };
  std::size_t num_axes_;
  std::vector<PauliOperator> pattern_ops_;
  std::vector<CompiledPauli> patterns_;
  std::vector<Term> terms_;
  std::vector<std::vector<double>> signs_;  // (-1)^{popcount(i & z)} per pattern, small n only
};

/// prod_j (I + O_j(angles))/2 for rotating observables sharing one frame.
class RotatingProjector {
 public:
  RotatingProjector() = default;
  explicit RotatingProjector(std::vector<RotatingObservable> observables) : observables_(std::move(observables)) {}

  /// Generators multiplied by `signs` (+1/-1 each) and rotated by a frame with the given axes.
  static RotatingProjector for_generators(const std::vector<PauliOperator>& generators, const std::vector<int>& signs,
                                          const std::vector<PauliOperator>& axes);

  const std::vector<RotatingObservable>& observables() const { return observables_; }
  /// psi <- P(angles) psi (no renormalization).
  void apply(std::span<const double> angles, StateVector& psi) const;
  ProjectorProgram snapshot(std::span<const double> angles) const;

 private:
  std::vector<RotatingObservable> observables_;
};

struct MeasurementResult {
  int outcome = 1;  // 1: projected into range(P); 0: into its complement
  double probability = 1.0;
  StateVector state;
};

/// Born-rule projective measurement {P, I-P}; both branches are renormalized.
MeasurementResult measure_projector(const ProjectorProgram& projector, const StateVector& psi, std::mt19937_64& rng);
MeasurementResult measure_projector(const Eigen::MatrixXcd& projector, const StateVector& psi, std::mt19937_64& rng);

/// Deterministically selects the requested branch (used for forced jumps and
/// post-selection). Throws if the branch has vanishing weight.
MeasurementResult project_branch(const ProjectorProgram& projector, const StateVector& psi, int outcome);

MeasurementResult measure_projector(const RotatingProjector& projector, std::span<const double> angles,
                                    const StateVector& psi, std::mt19937_64& rng);
MeasurementResult project_branch(const RotatingProjector& projector, std::span<const double> angles,
                                 const StateVector& psi, int outcome);

/// Probability <psi|P|psi>.
double projector_probability(const ProjectorProgram& projector, const StateVector& psi);

}  // namespace mbhqc
