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

#include "mbhqc/holonomy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mbhqc {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<int> error_signs(const StabilizerCode& code, const PauliOperator& x) {
  std::vector<int> s;
  for (const auto& g : code.generators()) s.push_back(commutes(g, x) ? 1 : -1);
  return s;
}

}  // namespace

void validate_path_operators(const StabilizerCode& code, const PauliOperator& h, const PauliOperator& x) {
  if (h.num_qubits() != code.n() || x.num_qubits() != code.n()) {
    throw std::invalid_argument("path operators must act on " + std::to_string(code.n()) + " qubits");
  }
  if (!h.is_hermitian() || !x.is_hermitian()) throw std::invalid_argument("H and X must be Hermitian");
  if (h.is_identity_up_to_phase()) throw std::invalid_argument("H must not be the identity");
  bool any = false;
  for (const auto& g : code.generators()) {
    if (!commutes(h, g)) throw std::invalid_argument("H = " + h.to_string() + " is not a logical operator");
    any = any || anticommutes(x, g);
  }
  if (!any) throw std::invalid_argument("X = " + x.to_string() + " commutes with every generator");
  if (commutes(x, h)) throw std::invalid_argument("X must anticommute with H");
}

HolonomicPath::HolonomicPath(CodePtr code, PauliOperator h, PauliOperator x, double theta)
    : code_(std::move(code)), h_(std::move(h)), x_(std::move(x)), theta_(theta) {
  if (!code_) throw std::invalid_argument("null code");
  validate_path_operators(*code_, h_, x_);
  if (!std::isfinite(theta_) || theta_ <= -kPi || theta_ > kPi + 1e-12) {
    throw std::invalid_argument("theta must lie in (-pi, pi]");
  }
}

std::array<double, 2> HolonomicPath::frame_angles(double phi) const { return {phi, theta_ * phi / (2.0 * kPi)}; }

UnitaryProgram HolonomicPath::unitary(double phi) const {
  const auto a = frame_angles(phi);
  UnitaryProgram u;
  u.then_rotate(x_, a[0]).then_rotate(h_, a[1]);
  return u;
}

void HolonomicPath::apply(double phi, StateVector& psi) const { unitary(phi).apply(psi); }

ProjectorProgram HolonomicPath::rotated_projector(double phi) const {
  return ProjectorProgram::code_space(*code_).rotated(unitary(phi));
}

RotatingProjector HolonomicPath::rotating_code_projector() const {
  return RotatingProjector::for_generators(code_->generators(), std::vector<int>(code_->num_generators(), 1),
                                           frame_axes());
}

RotatingProjector HolonomicPath::rotating_error_projector() const {
  return RotatingProjector::for_generators(code_->generators(), error_signs(*code_, x_), frame_axes());
}

UnitaryProgram HolonomicPath::gate() const {
  UnitaryProgram u;
  u.then_rotate(h_, theta_);
  return u;
}

void apply_path_unitary(const HolonomicPath& path, double phi, StateVector& psi) {
  if (psi.num_qubits() != path.num_qubits()) throw std::invalid_argument("state/path dimension mismatch");
  path.apply(phi, psi);
}

Overlap small_rotation_overlap(double theta, double phi, double dphi) {
  const double a = theta * dphi / (2.0 * kPi);
  const double ca = std::cos(a) * std::cos(dphi);
  const double sa = std::sin(a) * std::cos(2.0 * phi - dphi);
  Overlap o;
  o.c = std::sqrt(ca * ca + sa * sa);
  o.xi = std::atan(sa / ca);
  return o;
}

Overlap small_rotation_overlap(const HolonomicPath& path, double phi, double dphi) {
  return small_rotation_overlap(path.theta(), phi, dphi);
}

double discrete_no_jump_probability(double theta, double dphi) {
  if (!(dphi > 0.0)) throw std::invalid_argument("dphi must be positive");
  return std::exp(-(dphi / (2.0 * kPi)) * (theta * theta / 2.0 + 4.0 * kPi * kPi));
}

StateVector instantaneous_code_state(const HolonomicPath& path, double phi, const StateVector& psi_bar) {
  if (psi_bar.num_qubits() != path.num_qubits()) throw std::invalid_argument("state/path dimension mismatch");
  if (projector_probability(ProjectorProgram::code_space(path.code()), psi_bar) < 1.0 - 1e-8) {
    throw std::invalid_argument("state is not in the code space");
  }
  StateVector psi = psi_bar;
  psi.apply_rotation(path.h(), -path.theta() / (4.0 * kPi) * std::sin(2.0 * phi));
  path.apply(phi, psi);
  return psi;
}

double error_chi(double theta, double zeta) { return std::atan(theta / (2.0 * kPi) * std::sin(2.0 * zeta)); }

double error_theta(double theta, double zeta) {
  return theta / (4.0 * kPi) * std::sin(2.0 * zeta) + error_chi(theta, zeta);
}

ErrorOperator error_operator(const HolonomicPath& path, double zeta) {
  ErrorOperator r;
  r.chi = error_chi(path.theta(), zeta);
  r.theta_err = error_theta(path.theta(), zeta);
  r.e = path.unitary(zeta).inverse();
  r.e.then_pauli(path.x()).then_rotate(path.h(), r.chi).then(path.unitary(zeta));
  return r;
}

std::string_view to_string(CorrectionTarget t) {
  return t == CorrectionTarget::kCodeSpace ? "correct-to-code" : "correct-to-error";
}

CorrectionTarget parse_correction_target(std::string_view text) {
  if (text == "correct-to-code" || text == "code-space" || text == "code") return CorrectionTarget::kCodeSpace;
  if (text == "correct-to-error" || text == "error-space" || text == "error") return CorrectionTarget::kErrorSpace;
  throw std::invalid_argument("unknown correction target '" + std::string(text) + "'");
}

double correction_theta_tilde(double theta, double zeta, CorrectionTarget target) {
  const double s2 = std::sin(2.0 * zeta);
  const double te = error_theta(theta, zeta);
  if (target == CorrectionTarget::kCodeSpace) {
    return (3.0 * kPi * theta - 4.0 * kPi * te - theta * s2) / (7.0 * kPi - 2.0 * zeta - s2);
  }
  return (12.0 * kPi * theta + 4.0 * kPi * te + theta * s2) / (8.0 * kPi - 2.0 * zeta + s2);
}

CorrectionPath::CorrectionPath(HolonomicPath base, double zeta, CorrectionTarget target)
    : base_(std::move(base)), zeta_(zeta), target_(target) {
  if (!(zeta >= 0.0 && zeta <= 2.0 * kPi)) throw std::invalid_argument("jump angle must lie in [0, 2pi]");
  theta_tilde_ = correction_theta_tilde(base_.theta(), zeta_, target_);
  final_angle_ = target_ == CorrectionTarget::kCodeSpace ? 3.5 * kPi - zeta_ : 4.0 * kPi - zeta_;
}

std::array<double, 2> CorrectionPath::frame_angles(double phi) const {
  return {phi + zeta_, (base_.theta() * (phi + zeta_) - theta_tilde_ * phi) / (2.0 * kPi)};
}

UnitaryProgram CorrectionPath::unitary(double phi) const {
  UnitaryProgram u = base_.unitary(zeta_).inverse();
  u.then(base_.unitary(phi + zeta_)).then_rotate(base_.h(), -theta_tilde_ * phi / (2.0 * kPi));
  return u;
}

RotatingProjector CorrectionPath::tracked_projector() const { return base_.rotating_error_projector(); }

StateVector CorrectionPath::target_state(const StateVector& psi_bar) const {
  StateVector psi = psi_bar;
  base_.gate().apply(psi);
  if (target_ == CorrectionTarget::kErrorSpace) psi.apply(base_.x());
  return psi;
}

CorrectionPath correction_path(const HolonomicPath& path, double zeta, CorrectionTarget target) {
  return CorrectionPath(path, zeta, target);
}

std::size_t step_count(double end, double dphi) {
  if (!(dphi > 0.0)) throw std::invalid_argument("step must be positive");
  if (!(end >= 0.0)) throw std::invalid_argument("end angle must be non-negative");
  return static_cast<std::size_t>(std::ceil(end / dphi - 1e-9));
}

double loop_phase_sum(double theta, double dphi, double end) {
  const std::size_t steps = step_count(end, dphi);
  double sum = 0.0;
  for (std::size_t l = 1; l <= steps; ++l) {
    sum += small_rotation_overlap(theta, std::min(static_cast<double>(l) * dphi, end), dphi).xi;
  }
  return sum;
}

}  // namespace mbhqc
