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

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "mbhqc/discrete.hpp"
#include "mbhqc/rng.hpp"
#include "oracle.hpp"

namespace {

using mbhqc::CorrectionPolicy;
using mbhqc::DiscreteRunConfig;
using mbhqc::HolonomicPath;
using mbhqc::PauliOperator;
using mbhqc::StateVector;
constexpr double kPi = std::numbers::pi;
constexpr double kTheta = kPi / 6.0;

DiscreteRunConfig bitflip_config(double dphi, CorrectionPolicy policy = CorrectionPolicy::kNone) {
  DiscreteRunConfig c;
  c.code = std::make_shared<const mbhqc::StabilizerCode>(mbhqc::builtin_code("bitflip3"));
  c.h = PauliOperator::parse("XXX");
  c.x = PauliOperator::parse("XIZ");
  c.theta = kTheta;
  c.dphi = dphi;
  c.policy = policy;
  c.master_seed = 2024;
  return c;
}

TEST(Discrete, ConfigValidation) {
  auto c = bitflip_config(0.01);
  EXPECT_NO_THROW(c.validate());
  c.dphi = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = bitflip_config(0.01);
  c.trajectories = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = bitflip_config(0.01);
  c.x = PauliOperator::parse("ZZZ");
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = bitflip_config(0.01);
  c.logical_state = {1.0, 0.0, 0.0};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(mbhqc::parse_correction_policy("correct-to-code"), CorrectionPolicy::kCorrectToCode);
  EXPECT_THROW(mbhqc::parse_correction_policy("sometimes"), std::invalid_argument);
}

TEST(Discrete, SingleGeneratorProjectorMatchesFullRotation) {
  const auto code = mbhqc::builtin_code("bitflip3");
  const HolonomicPath path(code, PauliOperator::parse("ZZZ"), PauliOperator::parse("IIX"), kTheta);
  const oracle::Mat p0 = oracle::projector({"ZZI", "IZZ"});
  EXPECT_LT((mbhqc::single_generator_projector(path, 0.0).to_dense(3) - p0).norm(), 1e-14);
  const auto first = mbhqc::single_generator_projector(path, 1.0).observables();
  ASSERT_EQ(first.size(), 2U);
  EXPECT_EQ(first[1].terms().size(), 1U);
  EXPECT_EQ(first[1].terms()[0].op.to_string(), "ZZI");
  for (int l = 0; l <= 64; ++l) {
    const double phi = 2.0 * kPi * l / 64.0;
    const oracle::Mat v = oracle::path_v(oracle::pauli("ZZZ"), oracle::pauli("IIX"), kTheta, phi);
    EXPECT_LT((mbhqc::single_generator_projector(path, phi).to_dense(3) - v * p0 * v.adjoint()).norm(), 1e-10);
  }
  const auto shor = mbhqc::builtin_code("shor9");
  const HolonomicPath sp(shor, PauliOperator::parse("ZIIZIIZII"), PauliOperator::parse("XIIXIIXII"), kTheta);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (double phi : {0.4, 2.2}) {
    std::vector<mbhqc::cplx> amps(512);
    for (auto& a : amps) a = {g(rng), g(rng)};
    StateVector a(9, amps);
    StateVector b = a;
    mbhqc::single_generator_projector(sp, phi).apply(a);
    sp.rotated_projector(phi).apply(b);
    EXPECT_LT((a.to_eigen() - b.to_eigen()).norm(), 1e-10);
  }
}

TEST(Discrete, NoJumpLoopReproducesTheGate) {
  const auto c = bitflip_config(1e-3);
  const auto path = c.path();
  const StateVector psi_bar(3, {0.6, 0, 0, 0, 0, 0, 0, mbhqc::cplx(0.0, 0.8)});
  const auto out = mbhqc::evolve_no_jump(path, psi_bar, 1e-3, 2.0 * kPi);
  const oracle::Vec g = oracle::expi(kTheta, oracle::pauli("XXX")) * psi_bar.to_eigen();
  EXPECT_GE(oracle::fid(out.to_eigen(), g), 1.0 - 1e-8);

  auto flat = bitflip_config(1e-2);
  flat.theta = 0.0;
  flat.suppress_random_jumps = true;
  std::mt19937_64 rng(1);
  const auto rec = mbhqc::run_discrete_trajectory(flat, rng);
  EXPECT_TRUE(rec.jump_events.empty());
  EXPECT_NEAR(rec.final_fidelity, 1.0, 1e-12);
  EXPECT_NEAR(mbhqc::fidelity(rec.final_state, mbhqc::logical_state(*flat.code, {})), 1.0, 1e-12);
}

TEST(Discrete, InstantaneousStateAndErrorOperatorMatchSimulation) {
  const double d = 1e-3;
  const auto path = bitflip_config(d).path();
  const StateVector psi_bar(3, {0.8, 0, 0, 0, 0, 0, 0, 0.6});
  for (double phi : {0.3, 1.0, kPi / 2.0, 2.5, 4.0, 5.9}) {
    const auto sim = mbhqc::evolve_no_jump(path, psi_bar, d, phi);
    EXPECT_LE(1.0 - mbhqc::fidelity(sim, mbhqc::instantaneous_code_state(path, phi, psi_bar)), 10.0 * d) << phi;
    const auto [jumped, zeta] = mbhqc::forced_jump_state(path, psi_bar, d, phi);
    StateVector expect = mbhqc::instantaneous_code_state(path, zeta, psi_bar);
    mbhqc::error_operator(path, zeta).e.apply(expect);
    EXPECT_LE(1.0 - mbhqc::fidelity(jumped, expect), 10.0 * d) << phi;
  }
}

TEST(Discrete, ForcedJumpIsCorrected) {
  auto c = bitflip_config(1e-3, CorrectionPolicy::kCorrectToCode);
  c.forced_jump_angle = kPi / 3.0;
  c.suppress_random_jumps = true;
  std::mt19937_64 rng(3);
  const auto rec = mbhqc::run_discrete_trajectory(c, rng);
  ASSERT_EQ(rec.jump_events.size(), 1U);
  EXPECT_NEAR(rec.jump_events[0].angle, kPi / 3.0, 1e-3);
  EXPECT_TRUE(rec.corrected);
  EXPECT_GE(rec.final_fidelity, 0.999);
  const oracle::Vec target = oracle::expi(kTheta, oracle::pauli("XXX")) * oracle::basis(8, 0);
  EXPECT_GE(oracle::fid(rec.final_state.to_eigen(), target), 0.999);
}

TEST(Discrete, CorrectionTargetsExtrapolate) {
  for (auto policy : {CorrectionPolicy::kCorrectToCode, CorrectionPolicy::kCorrectToError}) {
    for (double zeta : {kPi / 6.0, kPi / 3.0, kPi / 2.0, 2.0 * kPi / 3.0}) {
      double f[3];
      int i = 0;
      for (double d : {1e-2, 5e-3, 2.5e-3}) {
        auto c = bitflip_config(d, policy);
        c.forced_jump_angle = zeta;
        c.suppress_random_jumps = true;
        std::mt19937_64 rng(4);
        const auto rec = mbhqc::run_discrete_trajectory(c, rng);
        oracle::Vec target = oracle::expi(kTheta, oracle::pauli("XXX")) * oracle::basis(8, 0);
        if (policy == CorrectionPolicy::kCorrectToError) target = oracle::pauli("XIZ") * target;
        f[i++] = oracle::fid(rec.final_state.to_eigen(), target);
      }
      EXPECT_GE(mbhqc::richardson3(f[0], f[1], f[2]), 0.999) << zeta;
    }
  }
  EXPECT_NEAR(mbhqc::richardson3(1.0 + 0.01 + 1e-4, 1.0 + 0.005 + 0.25e-4, 1.0 + 0.0025 + 0.0625e-4), 1.0, 1e-14);
}

TEST(Discrete, NoJumpFractionMatchesClosedForm) {
  for (int n : {400, 800}) {
    auto c = bitflip_config(2.0 * kPi / n);
    c.trajectories = 4000;
    const auto s = mbhqc::monte_carlo_no_fault(c);
    const double p = mbhqc::discrete_no_jump_probability(kTheta, c.dphi);
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(c.trajectories));
    EXPECT_LE(std::abs(s.p_no_jump - p), 3.0 * sigma) << n;
    // Without correction a jump ends in a fault unless a later jump undoes it.
    EXPECT_GE(s.no_fault, s.no_jump);
    EXPECT_LE(s.no_fault - s.no_jump, c.trajectories / 100);
  }
}

TEST(Discrete, NoFaultProbabilityRisesAsStepShrinks) {
  double prev = 0.0;
  for (int n : {25, 50, 100, 200, 400}) {
    auto c = bitflip_config(2.0 * kPi / n);
    c.trajectories = 2000;
    const auto s = mbhqc::monte_carlo_no_fault(c);
    EXPECT_GT(s.p_no_fault, prev) << n;
    prev = s.p_no_fault;
  }
}

TEST(Discrete, CorrectionBeatsNoCorrection) {
  auto none = bitflip_config(2.0 * kPi / 100.0);
  none.trajectories = 2000;
  auto fix = none;
  fix.policy = CorrectionPolicy::kCorrectToCode;
  const auto a = mbhqc::monte_carlo_no_fault(none);
  const auto b = mbhqc::monte_carlo_no_fault(fix);
  const double se = std::sqrt(a.p_no_fault * (1 - a.p_no_fault) / 2000.0 + b.p_no_fault * (1 - b.p_no_fault) / 2000.0);
  EXPECT_GT((b.p_no_fault - a.p_no_fault) / se, 1.645);
  EXPECT_GT(b.corrected, 0U);
}

TEST(Discrete, FirstJumpDistributionMatchesOverlapProduct) {
  // Exact law of the first jump step: prod_{m<l} c_m^2 (1 - c_l^2), from the overlap c.
  const int n = 100;
  const double d = 2.0 * kPi / n;
  std::vector<double> prob(n + 1, 0.0);
  double survive = 1.0;
  for (int l = 1; l <= n; ++l) {
    const double c2 = std::pow(mbhqc::small_rotation_overlap(kTheta, l * d, d).c, 2);
    prob[l - 1] = survive * (1.0 - c2);
    survive *= c2;
  }
  prob[n] = survive;

  const std::size_t samples = 100000;
  const auto c = bitflip_config(d);
  std::vector<double> counts(n + 1, 0.0);
  for (std::size_t i = 0; i < samples; ++i) {
    auto rng = mbhqc::trajectory_stream(77, i);
    const auto rec = mbhqc::run_discrete_trajectory(c, rng);
    counts[rec.jump_events.empty() ? n : rec.jump_events[0].step - 1] += 1.0;
  }
  // 20 bins of 5 steps plus the no-jump cell.
  std::vector<double> obs(21, 0.0), expct(21, 0.0);
  for (int l = 0; l < n; ++l) {
    obs[l / 5] += counts[l];
    expct[l / 5] += prob[l] * samples;
  }
  obs[20] = counts[n];
  expct[20] = prob[n] * samples;
  double chi2 = 0.0;
  for (int b = 0; b < 21; ++b) chi2 += std::pow(obs[b] - expct[b], 2) / expct[b];
  const boost::math::chi_squared dist(20);
  EXPECT_LT(chi2, boost::math::quantile(dist, 0.99));
}

TEST(Discrete, ResultsIndependentOfThreadCount) {
  auto c = bitflip_config(2.0 * kPi / 100.0, CorrectionPolicy::kCorrectToCode);
  c.trajectories = 300;
  const auto a = mbhqc::monte_carlo_no_fault(c, 1);
  const auto b = mbhqc::monte_carlo_no_fault(c, 4);
  EXPECT_EQ(a.no_fault, b.no_fault);
  EXPECT_EQ(a.no_jump, b.no_jump);
  EXPECT_EQ(a.mean_final_fidelity, b.mean_final_fidelity);
}

TEST(Discrete, SingleGeneratorModeAgreesWithFullProjector) {
  auto c = bitflip_config(2.0 * kPi / 200.0);
  c.trajectories = 1000;
  const auto full = mbhqc::monte_carlo_no_fault(c);
  c.mode = mbhqc::MeasurementMode::kSingleGenerator;
  const auto single = mbhqc::monte_carlo_no_fault(c);
  EXPECT_LE(std::abs(static_cast<double>(full.no_jump) - static_cast<double>(single.no_jump)), 2.0);
}

}  // namespace
