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
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "mbhqc/codes.hpp"
#include "mbhqc/densesim.hpp"
#include "mbhqc/holonomy.hpp"

namespace mbhqc {

enum class CorrectionPolicy { kNone, kCorrectToCode, kCorrectToError };
enum class MeasurementMode { kFullProjector, kSingleGenerator };

std::string_view to_string(CorrectionPolicy p);
CorrectionPolicy parse_correction_policy(std::string_view text);

struct DiscreteRunConfig {
  CodePtr code;
  PauliOperator h;
  PauliOperator x;
  double theta = 0.0;
  double dphi = 0.0;
  CorrectionPolicy policy = CorrectionPolicy::kNone;
  std::size_t trajectories = 2000;
  std::uint64_t master_seed = 1;
  /// Amplitudes over the 2^k logical basis; empty means the first logical basis state.
  std::vector<cplx> logical_state;
  double success_threshold = 0.99;
  MeasurementMode mode = MeasurementMode::kFullProjector;
  /// Forces outcome 0 at the grid step nearest this angle.
  std::optional<double> forced_jump_angle;
  /// Takes outcome 1 at every step that is not forced (post-selection).
  bool suppress_random_jumps = false;

  void validate() const;
  HolonomicPath path() const { return HolonomicPath(code, h, x, theta); }
};

struct JumpEvent {
  std::size_t step = 0;
  double angle = 0.0;
  bool during_correction = false;
};

struct TrajectoryRecord {
  std::vector<JumpEvent> jump_events;
  double final_fidelity = 0.0;
  bool fault_free = false;
  bool corrected = false;
  std::size_t steps = 0;
  StateVector final_state;
};

/// Logical state embedded in the code space: L(0) a.
StateVector logical_state(const StabilizerCode& code, const std::vector<cplx>& amplitudes);

TrajectoryRecord run_discrete_trajectory(const DiscreteRunConfig& config, std::mt19937_64& rng);

struct MonteCarloSummary {
  std::size_t trajectories = 0;
  std::size_t no_fault = 0;
  std::size_t no_jump = 0;
  std::size_t corrected = 0;
  double p_no_fault = 0.0;
  double ci95 = 0.0;
  double p_no_jump = 0.0;
  double ci95_no_jump = 0.0;
  double mean_final_fidelity = 0.0;
};

/// Half-width of the Wald 95% interval for a binomial proportion.
double wald_ci95(double p, std::size_t n);

/// Runs config.trajectories trajectories. Trajectory i draws from
/// trajectory_stream(master_seed, i), so results do not depend on `threads`.
MonteCarloSummary monte_carlo_no_fault(const DiscreteRunConfig& config, unsigned threads = 0);

/// Rotated projector built from one rotated generator: the generator set is
/// transformed so only its first element anticommutes with X; the rest are left unrotated.
ProjectorProgram single_generator_projector(const HolonomicPath& path, double phi);

/// Post-selected chain of rotated projectors from 0 to `end` at spacing dphi.
StateVector evolve_no_jump(const HolonomicPath& path, const StateVector& psi_bar, double dphi, double end);

/// Chain up to the grid step nearest zeta, taking outcome 0 at that step.
/// Returns the state and the grid angle of the jump.
std::pair<StateVector, double> forced_jump_state(const HolonomicPath& path, const StateVector& psi_bar, double dphi,
                                                 double zeta);

/// Extrapolates f(h) to h = 0 from samples at h, h/2, h/4 assuming f = f0 + a h + b h^2.
double richardson3(double f_h, double f_h2, double f_h4);

}  // namespace mbhqc
