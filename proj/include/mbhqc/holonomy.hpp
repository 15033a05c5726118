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

#include <array>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "mbhqc/codes.hpp"
#include "mbhqc/densesim.hpp"
#include "mbhqc/pauli.hpp"

namespace mbhqc {

/// V(phi) = exp(i theta phi / 2pi H) exp(i phi X) acting on a stabilizer code.
///
/// Construction checks that X anticommutes with at least one generator and
/// with H, and that H is a logical operator (commutes with every generator).
class HolonomicPath {
 public:
  HolonomicPath(CodePtr code, PauliOperator h, PauliOperator x, double theta);
  HolonomicPath(const StabilizerCode& code, PauliOperator h, PauliOperator x, double theta)
      : HolonomicPath(std::make_shared<const StabilizerCode>(code), std::move(h), std::move(x), theta) {}

  const StabilizerCode& code() const { return *code_; }
  const CodePtr& code_ptr() const { return code_; }
  const PauliOperator& h() const { return h_; }
  const PauliOperator& x() const { return x_; }
  double theta() const { return theta_; }
  std::size_t num_qubits() const { return code_->n(); }

  /// Frame axes {X, H}; frame angles at phi are {phi, theta phi / 2pi}.
  std::vector<PauliOperator> frame_axes() const { return {x_, h_}; }
  std::array<double, 2> frame_angles(double phi) const;

  UnitaryProgram unitary(double phi) const;
  void apply(double phi, StateVector& psi) const;
  /// V(phi) P0 V^dagger(phi).
  ProjectorProgram rotated_projector(double phi) const;
  /// Rotating projector for the code space (signs +1) or the X error space.
  RotatingProjector rotating_code_projector() const;
  RotatingProjector rotating_error_projector() const;
  /// exp(i theta H).
  UnitaryProgram gate() const;

 private:
  CodePtr code_;
  PauliOperator h_;
  PauliOperator x_;
  double theta_;
};

/// Throws std::invalid_argument describing the first violated path condition.
void validate_path_operators(const StabilizerCode& code, const PauliOperator& h, const PauliOperator& x);

/// V(phi) applied to psi: exp(i phi X) first, then exp(i theta phi/2pi H).
void apply_path_unitary(const HolonomicPath& path, double phi, StateVector& psi);

struct Overlap {
  double c = 1.0;
  double xi = 0.0;
};

/// P0 V^dagger(phi) V(phi - dphi) P0 = c exp(-i xi H) P0, exact trigonometric form.
Overlap small_rotation_overlap(const HolonomicPath& path, double phi, double dphi);
Overlap small_rotation_overlap(double theta, double phi, double dphi);

/// exp[-(dphi/2pi)(theta^2/2 + 4 pi^2)].
double discrete_no_jump_probability(double theta, double dphi);

/// V(phi) exp(-i theta/4pi sin(2 phi) H) psi_bar. psi_bar must lie in the code space.
StateVector instantaneous_code_state(const HolonomicPath& path, double phi, const StateVector& psi_bar);

struct ErrorOperator {
  UnitaryProgram e;  // V(zeta) exp(i chi H) X V^dagger(zeta)
  double chi = 0.0;
  double theta_err = 0.0;
};

ErrorOperator error_operator(const HolonomicPath& path, double zeta);
double error_chi(double theta, double zeta);
double error_theta(double theta, double zeta);

enum class CorrectionTarget { kCodeSpace, kErrorSpace };

std::string_view to_string(CorrectionTarget t);
CorrectionTarget parse_correction_target(std::string_view text);

/// W(phi) = exp(-i theta_tilde phi/2pi H) V(phi + zeta) V^dagger(zeta), run from 0 to final_angle.
class CorrectionPath {
 public:
  CorrectionPath(HolonomicPath base, double zeta, CorrectionTarget target);

  const HolonomicPath& base() const { return base_; }
  double zeta() const { return zeta_; }
  double theta_tilde() const { return theta_tilde_; }
  CorrectionTarget target() const { return target_; }
  /// 7pi/2 - zeta (code space) or 4pi - zeta (error space).
  double final_angle() const { return final_angle_; }

  UnitaryProgram unitary(double phi) const;
  /// Angles for the frame W(phi) V(zeta) = exp(i b H) exp(i a X) on axes {X, H}.
  std::array<double, 2> frame_angles(double phi) const;
  /// W(phi) V(zeta) [X P0 X] V^dagger(zeta) W^dagger(phi) with axes {X, H}.
  RotatingProjector tracked_projector() const;
  /// exp(i theta H) psi_bar or X exp(i theta H) psi_bar.
  StateVector target_state(const StateVector& psi_bar) const;

 private:
  HolonomicPath base_;
  double zeta_;
  CorrectionTarget target_;
  double theta_tilde_;
  double final_angle_;
};

CorrectionPath correction_path(const HolonomicPath& path, double zeta, CorrectionTarget target);
double correction_theta_tilde(double theta, double zeta, CorrectionTarget target);

/// Sum of xi_{l dphi} for l = 1 .. ceil(end/dphi).
double loop_phase_sum(double theta, double dphi, double end);

/// Number of grid steps covering [0, end] at spacing dphi, tolerant to rounding.
std::size_t step_count(double end, double dphi);

}  // namespace mbhqc
