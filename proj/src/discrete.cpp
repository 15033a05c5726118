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

#include "mbhqc/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "mbhqc/rng.hpp"

namespace mbhqc {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

RotatingProjector measurement_projector(const HolonomicPath& path, MeasurementMode mode) {
  if (mode == MeasurementMode::kFullProjector) return path.rotating_code_projector();
  const auto gens = transform_generators(path.code(), path.x());
  return RotatingProjector::for_generators(gens, std::vector<int>(gens.size(), 1), path.frame_axes());
}

MeasurementResult step(const RotatingProjector& proj, std::span<const double> angles, const StateVector& psi,
                       bool force_jump, bool suppress, std::mt19937_64& rng) {
  if (force_jump) return project_branch(proj, angles, psi, 0);
  if (suppress) return project_branch(proj, angles, psi, 1);
  return measure_projector(proj, angles, psi, rng);
}

}  // namespace

std::string_view to_string(CorrectionPolicy p) {
  switch (p) {
    case CorrectionPolicy::kNone: return "none";
    case CorrectionPolicy::kCorrectToCode: return "correct-to-code";
    default: return "correct-to-error";
  }
}

CorrectionPolicy parse_correction_policy(std::string_view text) {
  if (text == "none") return CorrectionPolicy::kNone;
  if (text == "correct-to-code") return CorrectionPolicy::kCorrectToCode;
  if (text == "correct-to-error") return CorrectionPolicy::kCorrectToError;
  throw std::invalid_argument("unknown correction policy '" + std::string(text) + "'");
}

void DiscreteRunConfig::validate() const {
  if (!code) throw std::invalid_argument("no code given");
  validate_path_operators(*code, h, x);
  if (!(dphi > 0.0 && dphi < std::numbers::pi / 4.0)) throw std::invalid_argument("dphi must lie in (0, pi/4)");
  if (trajectories < 1) throw std::invalid_argument("trajectories must be at least 1");
  if (!logical_state.empty() && logical_state.size() != (std::size_t{1} << code->k())) {
    throw std::invalid_argument("logical_state needs 2^k amplitudes");
  }
  if (!(success_threshold > 0.0 && success_threshold <= 1.0)) {
    throw std::invalid_argument("success_threshold must lie in (0, 1]");
  }
  if (forced_jump_angle && !(*forced_jump_angle > 0.0 && *forced_jump_angle <= kTwoPi)) {
    throw std::invalid_argument("forced jump angle must lie in (0, 2pi]");
  }
}

StateVector logical_state(const StabilizerCode& code, const std::vector<cplx>& amplitudes) {
  const Eigen::MatrixXcd l = code_basis(code);
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(l.cols());
  if (amplitudes.empty()) {
    a(0) = 1.0;
  } else {
    if (static_cast<Eigen::Index>(amplitudes.size()) != l.cols()) {
      throw std::invalid_argument("logical state needs 2^k amplitudes");
    }
    for (std::size_t i = 0; i < amplitudes.size(); ++i) a(static_cast<Eigen::Index>(i)) = amplitudes[i];
  }
  return StateVector::from_eigen(code.n(), l * a);
}

TrajectoryRecord run_discrete_trajectory(const DiscreteRunConfig& config, std::mt19937_64& rng) {
  config.validate();
  const HolonomicPath path = config.path();
  const RotatingProjector proj = measurement_projector(path, config.mode);
  const StateVector psi_bar = logical_state(*config.code, config.logical_state);

  const std::size_t n_steps = step_count(kTwoPi, config.dphi);
  std::size_t forced_step = 0;
  if (config.forced_jump_angle) {
    forced_step = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(*config.forced_jump_angle / config.dphi)),
                                          1, n_steps);
  }

  TrajectoryRecord rec;
  StateVector psi = psi_bar;
  std::optional<double> zeta;
  std::size_t l = 1;
  for (; l <= n_steps; ++l) {
    const double phi = std::min(static_cast<double>(l) * config.dphi, kTwoPi);
    const auto angles = path.frame_angles(phi);
    auto r = step(proj, angles, psi, l == forced_step, config.suppress_random_jumps, rng);
    psi = std::move(r.state);
    if (r.outcome == 0) {
      rec.jump_events.push_back({l, phi, false});
      if (config.policy != CorrectionPolicy::kNone && !zeta) {
        zeta = phi;
        ++l;
        break;
      }
    }
  }
  rec.steps = l - 1;

  StateVector target;
  if (zeta) {
    rec.corrected = true;
    const CorrectionTarget t = config.policy == CorrectionPolicy::kCorrectToCode ? CorrectionTarget::kCodeSpace
                                                                                 : CorrectionTarget::kErrorSpace;
    const CorrectionPath cp(path, *zeta, t);
    const RotatingProjector tracked = cp.tracked_projector();
    const std::size_t m_steps = step_count(cp.final_angle(), config.dphi);
    for (std::size_t m = 1; m <= m_steps; ++m) {
      const double phi = std::min(static_cast<double>(m) * config.dphi, cp.final_angle());
      const auto angles = cp.frame_angles(phi);
      auto r = step(tracked, angles, psi, false, config.suppress_random_jumps, rng);
      psi = std::move(r.state);
      if (r.outcome == 0) rec.jump_events.push_back({rec.steps + m, *zeta + phi, true});
    }
    rec.steps += m_steps;
    target = cp.target_state(psi_bar);
  } else {
    target = psi_bar;
    path.gate().apply(target);
  }
  rec.final_fidelity = fidelity(psi, target);
  rec.fault_free = rec.final_fidelity >= config.success_threshold;
  rec.final_state = std::move(psi);
  return rec;
}

double wald_ci95(double p, std::size_t n) {
  if (n == 0) return 0.0;
  return 1.959963984540054 * std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

MonteCarloSummary monte_carlo_no_fault(const DiscreteRunConfig& config, unsigned threads) {
  config.validate();
  struct Row {
    bool fault_free = false;
    bool no_jump = false;
    bool corrected = false;
    double fidelity = 0.0;
  };
  const std::size_t n = config.trajectories;
  std::vector<Row> rows(n);
  std::vector<std::exception_ptr> errors;
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  errors.resize(threads);

  auto work = [&](unsigned w) {
    try {
      for (std::size_t i = w; i < n; i += threads) {
        auto rng = trajectory_stream(config.master_seed, i);
        const auto rec = run_discrete_trajectory(config, rng);
        rows[i] = {rec.fault_free, rec.jump_events.empty(), rec.corrected, rec.final_fidelity};
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  MonteCarloSummary s;
  s.trajectories = n;
  double fid = 0.0;
  for (const auto& r : rows) {
    s.no_fault += r.fault_free;
    s.no_jump += r.no_jump;
    s.corrected += r.corrected;
    fid += r.fidelity;
  }
  const double dn = static_cast<double>(n);
  s.p_no_fault = static_cast<double>(s.no_fault) / dn;
  s.p_no_jump = static_cast<double>(s.no_jump) / dn;
  s.ci95 = wald_ci95(s.p_no_fault, n);
  s.ci95_no_jump = wald_ci95(s.p_no_jump, n);
  s.mean_final_fidelity = fid / dn;
  return s;
}

ProjectorProgram single_generator_projector(const HolonomicPath& path, double phi) {
  const auto gens = transform_generators(path.code(), path.x());
  std::vector<PauliSum> obs;
  obs.push_back(path.unitary(phi).conjugate(gens.front()));
  for (std::size_t j = 1; j < gens.size(); ++j) obs.emplace_back(gens[j]);
  return ProjectorProgram(std::move(obs));
}

StateVector evolve_no_jump(const HolonomicPath& path, const StateVector& psi_bar, double dphi, double end) {
  const RotatingProjector proj = path.rotating_code_projector();
  StateVector psi = psi_bar;
  const std::size_t n = step_count(end, dphi);
  for (std::size_t l = 1; l <= n; ++l) {
    const auto angles = path.frame_angles(std::min(static_cast<double>(l) * dphi, end));
    psi = project_branch(proj, angles, psi, 1).state;
  }
  return psi;
}

std::pair<StateVector, double> forced_jump_state(const HolonomicPath& path, const StateVector& psi_bar, double dphi,
                                                 double zeta) {
  const std::size_t l = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(zeta / dphi)));
  const double grid_zeta = static_cast<double>(l) * dphi;
  StateVector psi = evolve_no_jump(path, psi_bar, dphi, static_cast<double>(l - 1) * dphi);
  const auto angles = path.frame_angles(grid_zeta);
  psi = project_branch(path.rotating_code_projector(), angles, psi, 0).state;
  return {std::move(psi), grid_zeta};
}

double richardson3(double f_h, double f_h2, double f_h4) { return (8.0 * f_h4 - 6.0 * f_h2 + f_h) / 3.0; }

}  // namespace mbhqc
