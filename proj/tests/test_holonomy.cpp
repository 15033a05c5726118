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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "mbhqc/holonomy.hpp"
#include "oracle.hpp"

namespace {

using mbhqc::CorrectionTarget;
using mbhqc::HolonomicPath;
using mbhqc::PauliOperator;
using mbhqc::StateVector;
constexpr double kPi = std::numbers::pi;

struct Case {
  const char* code;
  const char* h;
  const char* x;
};

const Case kCases[] = {
    {"bitflip3", "XXX", "XIZ"},
    {"bitflip3", "ZZZ", "IIX"},
    {"shor9", "ZIIZIIZII", "XIIXIIXII"},
    {"steane7", "ZZZZZZZ", "XZIIIII"},
    {"perfect5", "ZZZZZ", "XIIII"},
};

std::vector<std::string> gen_strings(const mbhqc::StabilizerCode& code) {
  std::vector<std::string> g;
  for (const auto& p : code.generators()) g.push_back(p.to_string());
  return g;
}

TEST(Holonomy, PathValidation) {
  const auto code = mbhqc::builtin_code("bitflip3");
  EXPECT_THROW(HolonomicPath(code, PauliOperator::parse("XXX"), PauliOperator::parse("ZZZ"), 0.5),
               std::invalid_argument);  // X commutes with every generator
  EXPECT_THROW(HolonomicPath(code, PauliOperator::parse("XXX"), PauliOperator::parse("XII"), 0.5),
               std::invalid_argument);  // X commutes with H
  EXPECT_THROW(HolonomicPath(code, PauliOperator::parse("XII"), PauliOperator::parse("ZII"), 0.5),
               std::invalid_argument);  // H not logical
  EXPECT_NO_THROW(HolonomicPath(code, PauliOperator::parse("XXX"), PauliOperator::parse("XIZ"), kPi));
  EXPECT_THROW(HolonomicPath(code, PauliOperator::parse("XXX"), PauliOperator::parse("XIZ"), 4.0),
               std::invalid_argument);
}

TEST(Holonomy, OverlapTrivialCases) {
  const auto o = mbhqc::small_rotation_overlap(kPi / 6.0, 1.234, 0.0);
  EXPECT_DOUBLE_EQ(o.c, 1.0);
  EXPECT_DOUBLE_EQ(o.xi, 0.0);
  for (double d : {1e-2, 1e-3}) {
    const auto q = mbhqc::small_rotation_overlap(kPi / 6.0, kPi / 4.0, d);
    EXPECT_LT(std::abs(q.xi), 0.1 * d * d);
    // Away from pi/4 the phase is first order: (theta/2pi) cos(2 phi) dphi.
    const auto r = mbhqc::small_rotation_overlap(kPi / 6.0, 0.3, d);
    EXPECT_NEAR(r.xi, (1.0 / 12.0) * std::cos(0.6) * d, 2.0 * d * d);
  }
}

TEST(Holonomy, OverlapMatchesDenseOracleOnEveryCode) {
  const double theta = kPi / 6.0;
  for (const auto& c : kCases) {
    const auto code = mbhqc::builtin_code(c.code);
    const HolonomicPath path(code, PauliOperator::parse(c.h), PauliOperator::parse(c.x), theta);
    // P0 = L L^dagger with L an isometry, so the Frobenius residual equals that of
    // the compressed operator L^dagger (.) L.
    const oracle::Mat l = oracle::range_basis(oracle::projector(gen_strings(code)));
    const oracle::Mat h = oracle::pauli(c.h);
    const oracle::Mat x = oracle::pauli(c.x);
    const oracle::Mat hl = l.adjoint() * h * l;
    for (double d : {1e-2, 1e-3}) {
      const std::size_t steps = mbhqc::step_count(2.0 * kPi, d);
      const std::size_t stride = code.n() <= 3 ? 1 : 7;
      double worst = 0.0;
      for (std::size_t l_idx = 0; l_idx <= steps; l_idx += stride) {
        const double phi = std::min(static_cast<double>(l_idx) * d, 2.0 * kPi);
        const oracle::Mat a = oracle::path_v_times(h, x, theta, phi, l);
        const oracle::Mat b = oracle::path_v_times(h, x, theta, phi - d, l);
        const oracle::Mat lhs = a.adjoint() * b;
        const auto o = mbhqc::small_rotation_overlap(path, phi, d);
        const oracle::Mat rhs = o.c * (std::cos(o.xi) * oracle::Mat::Identity(2, 2) - mbhqc::cplx(0, std::sin(o.xi)) * hl);
        worst = std::max(worst, (lhs - rhs).norm());
      }
      EXPECT_LT(worst, 1e-9) << c.code << " " << c.x << " dphi=" << d;
    }
  }
}

TEST(Holonomy, NoJumpProbabilityValues) {
  EXPECT_NEAR(mbhqc::discrete_no_jump_probability(kPi / 6.0, 2.0 * kPi / 100.0), 0.6729, 5e-5);
  EXPECT_NEAR(mbhqc::discrete_no_jump_probability(0.0, 2.0 * kPi / 1000.0), 0.9613, 5e-5);
  EXPECT_NEAR(mbhqc::discrete_no_jump_probability(kPi / 6.0, 1e-12), 1.0, 1e-10);
  EXPECT_THROW(mbhqc::discrete_no_jump_probability(1.0, 0.0), std::invalid_argument);
}

TEST(Holonomy, NoJumpProbabilityIsProductOfOverlaps) {
  // Independent route: the chance of surviving a loop is the product of c^2 over steps.
  const double theta = kPi / 6.0;
  for (int n : {400, 800, 4000}) {
    const double d = 2.0 * kPi / n;
    double logp = 0.0;
    for (int l = 1; l <= n; ++l) {
      const auto o = mbhqc::small_rotation_overlap(theta, l * d, d);
      logp += 2.0 * std::log(o.c);
    }
    EXPECT_NEAR(std::exp(logp), mbhqc::discrete_no_jump_probability(theta, d), 2.0 * d * d * 40.0) << n;
  }
}

TEST(Holonomy, InstantaneousCodeState) {
  const double theta = kPi / 6.0;
  const HolonomicPath path(mbhqc::builtin_code("bitflip3"), PauliOperator::parse("XXX"), PauliOperator::parse("XIZ"),
                           theta);
  const StateVector psi_bar(3, {0.6, 0, 0, 0, 0, 0, 0, mbhqc::cplx(0, 0.8)});
  EXPECT_NEAR(mbhqc::fidelity(mbhqc::instantaneous_code_state(path, 0.0, psi_bar), psi_bar), 1.0, 1e-14);
  const oracle::Vec g = oracle::expi(theta, oracle::pauli("XXX")) * psi_bar.to_eigen();
  EXPECT_LT((mbhqc::instantaneous_code_state(path, 2.0 * kPi, psi_bar).to_eigen() - g).norm(), 1e-13);
  const oracle::Vec v = oracle::path_v(oracle::pauli("XXX"), oracle::pauli("XIZ"), theta, kPi / 2.0) *
                        psi_bar.to_eigen();
  EXPECT_LT((mbhqc::instantaneous_code_state(path, kPi / 2.0, psi_bar).to_eigen() - v).norm(), 1e-13);
  EXPECT_THROW(mbhqc::instantaneous_code_state(path, 0.1, StateVector::basis(3, 1)), std::invalid_argument);
}

TEST(HolonomyProperty, InstantaneousStateIsRotatedEigenstate) {
  for (const auto& c : kCases) {
    const auto code = mbhqc::builtin_code(c.code);
    const HolonomicPath path(code, PauliOperator::parse(c.h), PauliOperator::parse(c.x), kPi / 5.0);
    const auto l = mbhqc::code_basis(code);
    const StateVector psi_bar = StateVector::from_eigen(code.n(), l.col(0) * 0.8 + l.col(1) * mbhqc::cplx(0, 0.6));
    for (double phi : {0.2, 1.1, 2.9, 4.0}) {
      const auto psi = mbhqc::instantaneous_code_state(path, phi, psi_bar);
      // V^dagger(phi) = exp(-i phi X) exp(-i theta phi/2pi H).
      const oracle::Vec back = oracle::expi(-phi, oracle::pauli(c.x)) *
                               (oracle::expi(-kPi / 5.0 * phi / (2.0 * kPi), oracle::pauli(c.h)) * psi.to_eigen());
      for (const auto& g : gen_strings(code)) {
        const auto e = back.dot(oracle::pauli(g) * back);
        EXPECT_NEAR(e.real(), 1.0, 1e-10) << c.code << " " << g;
      }
    }
  }
}

TEST(Holonomy, RotatedGeneratorClosedForm) {
  const double theta = kPi / 6.0;
  const HolonomicPath path(mbhqc::builtin_code("bitflip3"), PauliOperator::parse("ZZZ"), PauliOperator::parse("IIX"),
                           theta);
  const auto proj = path.rotating_code_projector();
  const oracle::Mat g1 = oracle::pauli("ZZI");
  const oracle::Mat g2 = oracle::pauli("IZZ");
  const oracle::Mat h = oracle::pauli("ZZZ");
  const oracle::Mat x = oracle::pauli("IIX");
  for (double phi : {0.0, 0.3, 1.7, 3.3, 5.9}) {
    const auto angles = path.frame_angles(phi);
    const oracle::Mat got1 = proj.observables()[0].to_sum(angles).to_dense();
    const oracle::Mat got2 = proj.observables()[1].to_sum(angles).to_dense();
    const double s = std::sin(2.0 * phi);
    const oracle::Mat expect2 = std::cos(2.0 * phi) * g2 - s * std::sin(theta * phi / kPi) * h * x * g2 +
                                mbhqc::cplx(0, 1) * s * std::cos(theta * phi / kPi) * x * g2;
    EXPECT_LT((got1 - g1).norm(), 1e-12);
    EXPECT_LT((got2 - expect2).norm(), 1e-10) << phi;
  }
}

TEST(Holonomy, ErrorOperatorAngles) {
  EXPECT_NEAR(mbhqc::error_chi(kPi / 6.0, kPi / 2.0), 0.0, 1e-16);
  EXPECT_NEAR(mbhqc::error_theta(kPi / 6.0, kPi / 2.0), 0.0, 1e-16);
  EXPECT_NEAR(mbhqc::error_theta(kPi / 6.0, kPi / 4.0), 1.0 / 24.0 + std::atan(1.0 / 12.0), 1e-15);
  EXPECT_NEAR(mbhqc::error_theta(kPi / 6.0, kPi / 4.0), 0.12481, 1e-5);
}

TEST(Holonomy, ErrorOperatorActionOnInstantaneousState) {
  const double theta = kPi / 6.0;
  const HolonomicPath path(mbhqc::builtin_code("bitflip3"), PauliOperator::parse("XXX"), PauliOperator::parse("XIZ"),
                           theta);
  const StateVector psi_bar(3, {0.6, 0, 0, 0, 0, 0, 0, mbhqc::cplx(0, 0.8)});
  const oracle::Mat h = oracle::pauli("XXX");
  const oracle::Mat x = oracle::pauli("XIZ");
  for (double zeta : {0.3, kPi / 3.0, 2.0, 5.5}) {
    const auto err = mbhqc::error_operator(path, zeta);
    StateVector psi = mbhqc::instantaneous_code_state(path, zeta, psi_bar);
    err.e.apply(psi);
    const oracle::Vec expect =
        oracle::path_v(h, x, theta, zeta) * oracle::expi(err.theta_err, h) * x * psi_bar.to_eigen();
    EXPECT_LT((psi.to_eigen() - expect).norm(), 1e-12) << zeta;
    const oracle::Mat e_dense = oracle::path_v(h, x, theta, zeta) * oracle::expi(err.chi, h) * x *
                                oracle::path_v(h, x, theta, zeta).adjoint();
    EXPECT_LT((err.e.to_dense(3) - e_dense).norm(), 1e-12);
  }
}

TEST(Holonomy, CorrectionAnglesAtZeroJumpAngle) {
  const double theta = kPi / 6.0;
  EXPECT_NEAR(mbhqc::correction_theta_tilde(theta, 0.0, CorrectionTarget::kCodeSpace), 3.0 * theta / 7.0, 1e-15);
  EXPECT_NEAR(mbhqc::correction_theta_tilde(theta, 0.0, CorrectionTarget::kErrorSpace), 1.5 * theta, 1e-15);
}

TEST(Holonomy, CorrectionPathClosedForms) {
  const double theta = kPi / 6.0;
  const HolonomicPath path(mbhqc::builtin_code("bitflip3"), PauliOperator::parse("XXX"), PauliOperator::parse("XIZ"),
                           theta);
  const oracle::Mat h = oracle::pauli("XXX");
  const oracle::Mat x = oracle::pauli("XIZ");
  const mbhqc::cplx i(0, 1);
  for (double zeta : {kPi / 6.0, kPi / 3.0, kPi / 2.0, 2.0 * kPi / 3.0}) {
    const auto wc = mbhqc::correction_path(path, zeta, CorrectionTarget::kCodeSpace);
    EXPECT_NEAR(wc.final_angle(), 3.5 * kPi - zeta, 1e-15);
    EXPECT_LT((wc.unitary(0.0).to_dense(3) - oracle::Mat::Identity(8, 8)).norm(), 1e-13);
    const double tt = wc.theta_tilde();
    const oracle::Mat w_direct = oracle::expi(-tt * wc.final_angle() / (2.0 * kPi), h) *
                                 oracle::path_v(h, x, theta, wc.final_angle() + zeta) *
                                 oracle::path_v(h, x, theta, zeta).adjoint();
    const oracle::Mat w_closed = -i * oracle::expi(1.75 * (theta - tt) + tt * zeta / (2.0 * kPi), h) * x *
                                 oracle::path_v(h, x, theta, zeta).adjoint();
    EXPECT_LT((wc.unitary(wc.final_angle()).to_dense(3) - w_direct).norm(), 1e-10);
    EXPECT_LT((w_direct - w_closed).norm(), 1e-10);

    const auto we = mbhqc::correction_path(path, zeta, CorrectionTarget::kErrorSpace);
    EXPECT_NEAR(we.final_angle(), 4.0 * kPi - zeta, 1e-15);
    const double te = we.theta_tilde();
    const oracle::Mat e_direct = oracle::expi(-te * we.final_angle() / (2.0 * kPi), h) *
                                 oracle::path_v(h, x, theta, we.final_angle() + zeta) *
                                 oracle::path_v(h, x, theta, zeta).adjoint();
    const oracle::Mat e_closed =
        oracle::expi(2.0 * (theta - te) + te * zeta / (2.0 * kPi), h) * oracle::path_v(h, x, theta, zeta).adjoint();
    EXPECT_LT((we.unitary(we.final_angle()).to_dense(3) - e_direct).norm(), 1e-10);
    EXPECT_LT((e_direct - e_closed).norm(), 1e-10);
  }
}

TEST(Holonomy, LoopPhaseSumVanishes) {
  const double d = 2.0 * kPi / 200.0;
  EXPECT_NEAR(mbhqc::loop_phase_sum(kPi / 6.0, d, 2.0 * kPi), 0.0, 1e-9 * 200);
  EXPECT_EQ(mbhqc::loop_phase_sum(0.0, d, 2.0 * kPi), 0.0);
  EXPECT_NEAR(mbhqc::loop_phase_sum(kPi / 6.0, d, kPi), 0.0, 1e-9 * 100);
  // A quarter loop does not cancel.
  EXPECT_GT(std::abs(mbhqc::loop_phase_sum(kPi / 6.0, d, kPi / 4.0)), 1e-3);
}

}  // namespace
