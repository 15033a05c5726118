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
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mbhqc/codes.hpp"
#include "mbhqc/densesim.hpp"
#include "mbhqc/discrete.hpp"
#include "mbhqc/holonomy.hpp"

namespace mbhqc {

// ---------------------------------------------------------------------------
// Jump detector

struct DetectorConfig {
  bool enabled = false;
  double kappa_window = 0.5;  // kappa * Delta t
  double threshold = 4.0;     // h
};

/// One-sided CUSUM on window averages y_k of a measurement current:
/// S_n = -8 kappa Dt sum y_k, m_n = min(0, S_1..S_n); fires when S_n - m_n >= h.
class CusumDetector {
 public:
  CusumDetector(double kappa, double window, double threshold, std::size_t samples_per_window);

  /// Feeds one current sample (spacing window / samples_per_window). Returns true
  /// when a window closes with S - m >= h for the first time.
  bool push(double current);
  bool fired() const { return fired_at_.has_value(); }
  /// Index of the window (1-based) that fired.
  std::optional<std::size_t> fired_window() const { return fired_at_; }
  std::size_t windows() const { return k_; }
  double statistic() const { return s_; }
  double running_min() const { return m_; }
  double last_window_mean() const { return last_y_; }

 private:
  double factor_;
  double threshold_;
  std::size_t per_window_;
  std::size_t count_ = 0;
  double acc_ = 0.0;
  std::size_t k_ = 0;
  double s_ = 0.0;
  double m_ = 0.0;
  double last_y_ = 0.0;
  std::optional<std::size_t> fired_at_;
};

struct DetectorTraceRow {
  double t;
  double y;
  double s;
  double s_minus_m;
};

/// Runs the detector over current samples spaced by dt; returns the end time of
/// the first window whose statistic rises h above its running minimum.
std::optional<double> detect_jump(const std::vector<double>& current, double dt, double window, double kappa,
                                  double threshold, std::vector<DetectorTraceRow>* trace = nullptr);

struct DetectorCalibration {
  std::size_t realizations = 0;
  std::size_t detected_in_time = 0;
  std::size_t false_alarms = 0;
  std::size_t missed = 0;
  double success_fraction = 0.0;
  double mean_delay_windows = 0.0;
};

/// Synthetic current with mean +1 switching to -1 after `jump_window` windows.
/// Success means detection no earlier than the jump and no later than
/// `max_delay_windows` windows after it.
DetectorCalibration calibrate_detector(double kappa, double kappa_window, double threshold, std::size_t realizations,
                                       std::uint64_t seed, std::size_t jump_window = 10,
                                       std::size_t max_delay_windows = 5, std::size_t samples_per_window = 50);

// ---------------------------------------------------------------------------
// Stochastic Schroedinger equation

struct ContinuousRunConfig {
  CodePtr code;
  PauliOperator h;
  PauliOperator x;
  double theta = 0.0;
  double kappa = 1.0;
  double omega = 0.01;
  double kappa_dt = 1e-3;
  std::size_t trajectories = 1000;
  std::uint64_t master_seed = 1;
  std::vector<cplx> logical_state;
  DetectorConfig detector;
  /// Path switch taken when the detector fires; kNone keeps the original path.
  CorrectionPolicy policy = CorrectionPolicy::kNone;
  /// Times at which lab-frame expectations are sampled.
  std::vector<double> sample_times;
  /// Extra observables O sampled as <V O V^dagger>, alongside the measured generators.
  std::vector<PauliOperator> extra_observables;
  /// Keep the detector trace of the first anticommuting channel.
  bool record_detector_trace = false;

  void validate() const;
  double total_time() const;
  HolonomicPath path() const { return HolonomicPath(code, h, x, theta); }
};

struct SseTrajectory {
  /// samples[i][j]: at sample_times[i], generator j then extra observable j - num_generators.
  std::vector<std::vector<double>> samples;
  StateVector final_state;
  std::optional<double> detection_time;
  bool corrected = false;
  double end_time = 0.0;
  double dt = 0.0;
  /// <g_a(T)> for the first generator anticommuting with X.
  double final_g = 1.0;
  /// Fidelity with the target (exp(i theta H) psi_bar, or the correction target).
  double final_fidelity = 0.0;
  std::vector<DetectorTraceRow> detector_trace;
  /// Mean over steps of the pre-renormalization norm^2 - 1.
  double mean_norm_drift = 0.0;
};

/// Euler-Maruyama for d psi = sum_j [-(kappa/2)(g_j(t) - <g_j>)^2 dt + sqrt(kappa)(g_j(t) - <g_j>) dW_j] psi
/// with g_j(t) = V(omega t) g_j V^dagger(omega t), renormalized every step.
SseTrajectory integrate_sse(const ContinuousRunConfig& config, std::mt19937_64& rng);

struct SseEnsemble {
  std::size_t trajectories = 0;
  double p_jump = 0.0;      // mean of (1 - <g_a(T)>)/2
  double p_jump_se = 0.0;   // standard error of that mean
  double mean_fidelity = 0.0;
  std::size_t detections = 0;
  std::vector<std::vector<double>> sample_mean;  // [time][observable]
  std::vector<std::vector<double>> sample_se;
};

/// Runs config.trajectories SSE trajectories with per-index RNG streams.
/// `on_final` (optional) sees each trajectory in index order after the run.
SseEnsemble run_sse_ensemble(const ContinuousRunConfig& config, unsigned threads = 0,
                             const std::function<void(std::size_t, const SseTrajectory&)>& on_final = {});

// ---------------------------------------------------------------------------
// Moment equations and closed forms

using MomentVector = std::array<cplx, 3>;  // <g>, <gX>, <gXH> in the rotating frame

struct MomentSample {
  double t;
  MomentVector x;
};

struct MomentTrajectory {
  std::vector<MomentSample> samples;
  MomentVector final{cplx{1.0, 0.0}, cplx{0.0, 0.0}, cplx{0.0, 0.0}};
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
};

/// A(t) of the rotating-frame moment equations with omega_X = omega, omega_H = theta omega / 2pi.
Eigen::Matrix3cd moment_matrix(double theta, double omega, double kappa, double t);

/// RK4 with nominal step omega dt = omega_dt; each step is compared with two half
/// steps and halved while the difference exceeds 1e-9. `samples` evenly spaced
/// outputs on [0, T] are recorded (plus t = 0) when nonzero.
MomentTrajectory integrate_moment_ode(double theta, double omega, double kappa, double t_final,
                                      std::size_t samples = 0, double omega_dt = 1e-4);

/// 1/2 [1 + (1 - omega theta^2 / 2 pi kappa) exp(-4 pi omega / kappa)].
double confinement_probability(double theta, double omega, double kappa);

/// (1 - Re <g>)/2.
double jump_probability_from_moments(const MomentVector& x);

// ---------------------------------------------------------------------------
// Ensemble checks

struct SymmetryReport {
  std::vector<double> times;
  std::vector<std::size_t> anticommuting;         // generator indices anticommuting with X
  std::vector<PauliOperator> even_products;       // products of anticommuting pairs and commuting generators
  std::vector<std::vector<double>> mean, se;      // [time][generators..., even products...]
  double max_pairwise_z = 0.0;
  double max_even_deviation = 0.0;  // |mean - 1| over even products
  double max_even_z = 0.0;
  bool passed = false;
};

/// SSE ensemble check that anticommuting generators evolve identically and even
/// products stay at 1. Sample times are `num_times` evenly spaced points on [0, T].
SymmetryReport generator_symmetry_check(const ContinuousRunConfig& config, std::size_t num_times, unsigned threads = 0);

struct SupermartingaleReport {
  std::vector<double> times;
  std::vector<double> mean_variance;
  std::vector<double> se_variance;
  double max_increase_z = 0.0;        // largest paired z of mean(v(t_{i+1}) - v(t_i))
  double max_conditional_z = 0.0;     // largest z of E[v(t) - v(s) | v(s) in bin]
  double drift0 = 0.0;                // estimated d<var>/dt at t = 0
  double drift0_se = 0.0;
  bool non_increasing = false;        // every z below the one-sided 99% quantile
};

/// Constant-observable measurement of Z on one qubit, starting from |+> (or an
/// eigenstate when `start_eigenstate`). Variance = 1 - <Z>^2.
SupermartingaleReport supermartingale_check(double kappa, double t_final, std::size_t trajectories,
                                            std::uint64_t seed, std::size_t num_times = 20,
                                            double kappa_dt = 1e-3, bool start_eigenstate = false);

// ---------------------------------------------------------------------------
// One-qubit mixture dynamics

/// Stationary density of dx = -(omega + (kappa/2) sin 4x) dt - sqrt(kappa) sin 2x dW on [0, pi).
///
/// Within each period (j pi/2, (j+1) pi/2) the solution restarts from the left
/// pole, which requires x0 to be a multiple of pi/2; other lower limits make the
/// integral diverge at the pole and are rejected.
class StationaryDensity {
 public:
  StationaryDensity(double omega, double kappa, double x0 = 0.0);

  double operator()(double x) const;
  /// Unnormalized value [int_{x0}^x e^{-r cot 2x'} sin 2x' dx'] / [e^{-r cot 2x} sin^3 2x], r = omega/kappa.
  double unnormalized(double x) const;
  double cdf(double x) const;
  /// int_0^pi of the unnormalized density.
  double normalization() const { return z_; }
  /// Stationary probability flux J (constant in x); negative for omega > 0.
  double flux() const;

 private:
  double omega_;
  double kappa_;
  double r_;
  double z_;
  double half_period_mass_;  // int over one pi/2 period, unnormalized
  double unnormalized_c(double c) const;
  double mass_up_to_c(double c) const;  // int_{u(c)}^{...}: mass of (0, u] with cot 2u = c
};

/// Milstein samples of x(T) mod pi for the one-qubit SDE; starting points uniform on [0, pi).
std::vector<double> sample_one_qubit_sde(double omega, double kappa, double t_final, std::size_t n,
                                         std::uint64_t seed, double kappa_dt = 1e-3, unsigned threads = 0);

/// Two-sided Kolmogorov-Smirnov statistic of samples against a CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
/// Asymptotic 1% critical value 1.628 / sqrt(n).
double ks_critical_1pct(std::size_t n);

// ---------------------------------------------------------------------------
// Rotating-frame consistency

struct FrameConsistencyReport {
  std::vector<double> times;
  std::vector<double> g_lab;        // <g_a(t)>_rho(t), lab-frame Lindblad
  std::vector<double> g_rot;        // <g_a>_rho~(t), rotating-frame Lindblad
  std::vector<double> g_ode;        // Re x_1(t) from the moment equations
  std::vector<double> purity_rot;
  double max_lab_vs_rot = 0.0;
  double max_rot_vs_ode = 0.0;
  bool purity_non_increasing = false;
};

/// Dense Lindblad integration of d rho = kappa sum_j (g_j(t) rho g_j(t) - rho) dt in the lab frame and of the
/// rotating-frame equation with effective Hamiltonian omega X + omega_H (cos 2wt H + i sin 2wt HX),
/// compared with the moment equations. Requires a single generator anticommuting with X.
FrameConsistencyReport rotating_frame_consistency(const ContinuousRunConfig& config, std::size_t num_times,
                                                  double omega_dt = 1e-4);

/// Lab-frame Lindblad density matrix at time t (dense).
Eigen::MatrixXcd lindblad_lab_state(const ContinuousRunConfig& config, double t_final, double omega_dt = 1e-4);

}  // namespace mbhqc
