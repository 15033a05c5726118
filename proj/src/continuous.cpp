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

#include "mbhqc/continuous.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/random/normal_distribution.hpp>

#include "mbhqc/errors.hpp"
#include "mbhqc/rng.hpp"

namespace mbhqc {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
constexpr cplx kI{0.0, 1.0};

unsigned resolve_threads(unsigned threads, std::size_t work) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, work)));
}

/// Runs body(i) for i in [0, n) on `threads` workers, rethrowing the first failure.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  threads = resolve_threads(threads, n);
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned w) {
    try {
      for (std::size_t i = w; i < n; i += threads) body(i);
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
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

/// z-score of a mean against zero that treats an exactly vanishing sample as z = 0.
double z_of(const std::vector<double>& d) {
  const double m = mean_of(d);
  const double se = se_of(d);
  if (se == 0.0) return std::abs(m) < 1e-12 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), m);
  return m / se;
}

std::size_t first_anticommuting(const StabilizerCode& code, const PauliOperator& x) {
  for (std::size_t j = 0; j < code.num_generators(); ++j) {
    if (anticommutes(code.generators()[j], x)) return j;
  }
  throw std::invalid_argument("X commutes with every generator");
}

}  // namespace

// ---------------------------------------------------------------------------

CusumDetector::CusumDetector(double kappa, double window, double threshold, std::size_t samples_per_window)
    : factor_(-8.0 * kappa * window), threshold_(threshold), per_window_(samples_per_window) {
  if (!(kappa > 0.0 && window > 0.0 && threshold > 0.0) || samples_per_window == 0) {
    throw std::invalid_argument("detector needs kappa, window, threshold > 0");
  }
}

bool CusumDetector::push(double current) {
  acc_ += current;
  if (++count_ < per_window_) return false;
  last_y_ = acc_ / static_cast<double>(per_window_);
  acc_ = 0.0;
  count_ = 0;
  ++k_;
  s_ += factor_ * last_y_;
  m_ = std::min(m_, s_);
  if (!fired_at_ && s_ - m_ >= threshold_) {
    fired_at_ = k_;
    return true;
  }
  return false;
}

std::optional<double> detect_jump(const std::vector<double>& current, double dt, double window, double kappa,
                                  double threshold, std::vector<DetectorTraceRow>* trace) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const auto per = static_cast<std::size_t>(std::max(1.0, std::round(window / dt)));
  CusumDetector det(kappa, window, threshold, per);
  std::optional<double> hit;
  for (double c : current) {
    const std::size_t before = det.windows();
    const bool fired = det.push(c);
    if (det.windows() != before && trace) {
      const double t = static_cast<double>(det.windows() * per) * dt;
      trace->push_back({t, det.last_window_mean(), det.statistic(), det.statistic() - det.running_min()});
    }
    if (fired) {
      hit = static_cast<double>(det.windows() * per) * dt;
      if (!trace) break;
    }
  }
  return hit;
}

DetectorCalibration calibrate_detector(double kappa, double kappa_window, double threshold, std::size_t realizations,
                                       std::uint64_t seed, std::size_t jump_window, std::size_t max_delay_windows,
                                       std::size_t samples_per_window) {
  const double window = kappa_window / kappa;
  const double dt = window / static_cast<double>(samples_per_window);
  const double noise = 1.0 / (2.0 * std::sqrt(kappa * dt));
  DetectorCalibration cal;
  cal.realizations = realizations;
  double delay_sum = 0.0;
  for (std::size_t r = 0; r < realizations; ++r) {
    auto rng = trajectory_stream(seed, r);
    std::normal_distribution<double> gauss;
    CusumDetector det(kappa, window, threshold, samples_per_window);
    const std::size_t last = jump_window + max_delay_windows;
    while (det.windows() < last && !det.fired()) {
      const double mu = det.windows() < jump_window ? 1.0 : -1.0;
      det.push(mu + noise * gauss(rng));
    }
    const std::size_t hit = det.fired_window().value_or(0);
    if (hit == 0) {
      ++cal.missed;
    } else if (hit <= jump_window) {
      ++cal.false_alarms;
    } else {
      ++cal.detected_in_time;
      delay_sum += static_cast<double>(hit - jump_window);
    }
  }
  cal.success_fraction = static_cast<double>(cal.detected_in_time) / static_cast<double>(std::max<std::size_t>(1, realizations));
  cal.mean_delay_windows = cal.detected_in_time ? delay_sum / static_cast<double>(cal.detected_in_time) : 0.0;
  return cal;
}

// ---------------------------------------------------------------------------

void ContinuousRunConfig::validate() const {
  if (!code) throw std::invalid_argument("no code given");
  validate_path_operators(*code, h, x);
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
  if (!(kappa_dt > 0.0 && kappa_dt <= 1e-2)) throw std::invalid_argument("kappa*dt must lie in (0, 1e-2]");
  if (trajectories < 1) throw std::invalid_argument("trajectories must be at least 1");
  if (!logical_state.empty() && logical_state.size() != (std::size_t{1} << code->k())) {
    throw std::invalid_argument("logical_state needs 2^k amplitudes");
  }
  if (detector.enabled && !(detector.kappa_window > 0.0 && detector.threshold > 0.0)) {
    throw std::invalid_argument("detector window and threshold must be positive");
  }
  for (const auto& o : extra_observables) {
    if (o.num_qubits() != code->n() || !o.is_hermitian()) throw std::invalid_argument("bad extra observable");
  }
}

double ContinuousRunConfig::total_time() const { return kTwoPi / omega; }

namespace {

struct SseEngine {
  const ContinuousRunConfig& cfg;
  HolonomicPath path;
  std::vector<RotatingObservable> lab;      // generators, then extra observables
  std::vector<RotatingObservable> tracked;  // error-space generators, then extra observables
  std::size_t num_gens;
  std::size_t channel;
  StateVector psi_bar;

  explicit SseEngine(const ContinuousRunConfig& c)
      : cfg(c), path(c.path()), num_gens(c.code->num_generators()), channel(first_anticommuting(*c.code, c.x)) {
    const auto axes = path.frame_axes();
    for (const auto& g : cfg.code->generators()) lab.emplace_back(g, axes);
    for (const auto& o : cfg.extra_observables) lab.emplace_back(o, axes);
    for (const auto& g : cfg.code->generators()) tracked.emplace_back(commutes(g, cfg.x) ? g : -g, axes);
    for (const auto& o : cfg.extra_observables) tracked.emplace_back(o, axes);
    psi_bar = logical_state(*cfg.code, cfg.logical_state);
  }

  struct Phase {
    const std::vector<RotatingObservable>* obs;
    std::function<std::array<double, 2>(double)> angles;  // frame angles at phase-local time
    double t_start;
    double duration;
    bool detect;
  };

  // Returns false on norm collapse.
  bool run(double dt_nominal, std::mt19937_64& rng, SseTrajectory& out) {
    out = SseTrajectory{};
    out.samples.assign(cfg.sample_times.size(), {});
    std::normal_distribution<double> gauss;
    StateVector psi = psi_bar;
    const std::size_t dim = psi.dim();
    const std::size_t n_obs = lab.size();
    std::vector<std::vector<cplx>> o_psi(n_obs, std::vector<cplx>(dim));
    std::vector<std::vector<cplx>> coeffs(n_obs);
    for (std::size_t j = 0; j < n_obs; ++j) coeffs[j].resize(std::max(lab[j].num_patterns(), tracked[j].num_patterns()));
    std::vector<cplx> next(dim);
    std::vector<double> m(n_obs), dw(num_gens);
    const double sk = std::sqrt(cfg.kappa);
    std::size_t next_sample = 0;
    double drift_sum = 0.0;
    std::size_t drift_count = 0;

    std::optional<CusumDetector> det;
    if (cfg.detector.enabled) {
      const double window = cfg.detector.kappa_window / cfg.kappa;
      const auto per = static_cast<std::size_t>(std::max(1.0, std::round(window / dt_nominal)));
      det.emplace(cfg.kappa, window, cfg.detector.threshold, per);
    }

    auto expectations_trig = [&](const std::vector<RotatingObservable>& obs, const double* c2, const double* s2,
                                 std::size_t count) {
      const auto* a = reinterpret_cast<const double*>(psi.amplitudes().data());
      for (std::size_t j = 0; j < count; ++j) {
        obs[j].coefficients_trig(c2, s2, coeffs[j].data());
        obs[j].apply_with(coeffs[j].data(), psi.amplitudes(), o_psi[j]);
        const auto* o = reinterpret_cast<const double*>(o_psi[j].data());
        double e = 0.0;
        for (std::size_t i = 0; i < 2 * dim; ++i) e += a[i] * o[i];
        m[j] = e;
      }
    };
    auto expectations = [&](const std::vector<RotatingObservable>& obs, const std::array<double, 2>& a,
                            std::size_t count) {
      const double c2[2] = {std::cos(2.0 * a[0]), std::cos(2.0 * a[1])};
      const double s2[2] = {std::sin(2.0 * a[0]), std::sin(2.0 * a[1])};
      expectations_trig(obs, c2, s2, count);
    };
    auto record = [&](double t, const std::vector<RotatingObservable>& obs, const std::array<double, 2>& a) {
      while (next_sample < cfg.sample_times.size() && cfg.sample_times[next_sample] <= t + 1e-9 * dt_nominal) {
        expectations(obs, a, n_obs);
        out.samples[next_sample].assign(m.begin(), m.end());
        ++next_sample;
      }
    };

    std::optional<CorrectionPath> cp;
    Phase phase{&lab, [&](double t) { return path.frame_angles(cfg.omega * t); }, 0.0, cfg.total_time(), det.has_value()};
    double t_global = 0.0;
    while (true) {
      const auto n_steps = static_cast<std::size_t>(std::max(1.0, std::round(phase.duration / dt_nominal)));
      const double dt = phase.duration / static_cast<double>(n_steps);
      out.dt = dt;
      const double sdt = std::sqrt(dt);
      const auto& obs = *phase.obs;
      bool switched = false;
      // Frame angles are affine in time, so cos/sin of twice the angles advance by a fixed rotation.
      const auto a0 = phase.angles(0.0);
      const auto a1 = phase.angles(dt);
      cplx rot[2], w[2];
      for (int k = 0; k < 2; ++k) w[k] = std::polar(1.0, 2.0 * (a1[k] - a0[k]));
      for (std::size_t step = 0; step < n_steps; ++step) {
        const double t_local = static_cast<double>(step) * dt;
        t_global = phase.t_start + t_local;
        if (step % 1024 == 0) {
          const auto a = phase.angles(t_local);
          for (int k = 0; k < 2; ++k) rot[k] = std::polar(1.0, 2.0 * a[k]);
        } else {
          for (int k = 0; k < 2; ++k) rot[k] *= w[k];
        }
        const double c2[2] = {rot[0].real(), rot[1].real()};
        const double s2[2] = {rot[0].imag(), rot[1].imag()};
        if (next_sample < cfg.sample_times.size()) record(t_global, obs, phase.angles(t_local));
        expectations_trig(obs, c2, s2, num_gens);
        auto amps = psi.amplitudes();
        auto* nx = reinterpret_cast<double*>(next.data());
        const auto* ap = reinterpret_cast<const double*>(amps.data());
        std::copy(ap, ap + 2 * dim, nx);
        for (std::size_t j = 0; j < num_gens; ++j) {
          dw[j] = sdt * gauss(rng);
          const double mj = m[j];
          const double drift = -0.5 * cfg.kappa * dt;
          const double ca = drift * (1.0 + mj * mj) - sk * dw[j] * mj;
          const double cb = -2.0 * drift * mj + sk * dw[j];
          const auto* op = reinterpret_cast<const double*>(o_psi[j].data());
          for (std::size_t i = 0; i < 2 * dim; ++i) nx[i] += ca * ap[i] + cb * op[i];
        }
        double nrm2 = 0.0;
        for (std::size_t i = 0; i < 2 * dim; ++i) nrm2 += nx[i] * nx[i];
        if (!std::isfinite(nrm2) || nrm2 < 1e-16) return false;
        drift_sum += nrm2 - 1.0;
        ++drift_count;
        const double inv = 1.0 / std::sqrt(nrm2);
        auto* out_p = reinterpret_cast<double*>(amps.data());
        for (std::size_t i = 0; i < 2 * dim; ++i) out_p[i] = nx[i] * inv;

        if (phase.detect && det) {
          const double current = m[channel] + dw[channel] / (2.0 * sk * dt);
          const std::size_t before = det->windows();
          const bool fired = det->push(current);
          const double t_end = t_global + dt;
          if (cfg.record_detector_trace && det->windows() != before) {
            out.detector_trace.push_back(
                {t_end, det->last_window_mean(), det->statistic(), det->statistic() - det->running_min()});
          }
          if (fired && !out.detection_time) {
            out.detection_time = t_end;
            const double zeta = cfg.omega * t_end;
            if (cfg.policy != CorrectionPolicy::kNone && zeta <= kTwoPi) {
              const CorrectionTarget target = cfg.policy == CorrectionPolicy::kCorrectToCode
                                                  ? CorrectionTarget::kCodeSpace
                                                  : CorrectionTarget::kErrorSpace;
              cp.emplace(path, zeta, target);
              phase = Phase{&tracked, [&](double t) { return cp->frame_angles(cfg.omega * t); }, t_end,
                            cp->final_angle() / cfg.omega, false};
              out.corrected = true;
              switched = true;
              break;
            }
          }
        }
      }
      if (!switched) {
        t_global = phase.t_start + phase.duration;
        const auto a = phase.angles(phase.duration);
        record(t_global, obs, a);
        expectations(obs, a, num_gens);
        out.final_g = m[channel];
        break;
      }
    }
    out.end_time = t_global;
    out.mean_norm_drift = drift_count ? drift_sum / static_cast<double>(drift_count) : 0.0;
    StateVector target = cp ? cp->target_state(psi_bar) : psi_bar;
    if (!cp) path.gate().apply(target);
    out.final_fidelity = fidelity(psi, target);
    out.final_state = std::move(psi);
    return true;
  }
};

}  // namespace

SseTrajectory integrate_sse(const ContinuousRunConfig& config, std::mt19937_64& rng) {
  config.validate();
  if (!std::is_sorted(config.sample_times.begin(), config.sample_times.end())) {
    throw std::invalid_argument("sample_times must be sorted");
  }
  SseEngine engine(config);
  SseTrajectory out;
  double dt = config.kappa_dt / config.kappa;
  if (engine.run(dt, rng, out)) return out;
  if (engine.run(0.5 * dt, rng, out)) return out;
  throw NumericalFailure("SSE state norm collapsed after halving the step");
}

SseEnsemble run_sse_ensemble(const ContinuousRunConfig& config, unsigned threads,
                             const std::function<void(std::size_t, const SseTrajectory&)>& on_final) {
  config.validate();
  const std::size_t n = config.trajectories;
  std::vector<SseTrajectory> runs(n);
  parallel_for(n, threads, [&](std::size_t i) {
    auto rng = trajectory_stream(config.master_seed, i);
    runs[i] = integrate_sse(config, rng);
    runs[i].final_state = StateVector();
    if (!on_final) runs[i].detector_trace.clear();
  });
  SseEnsemble e;
  e.trajectories = n;
  std::vector<double> pj(n), fid(n);
  for (std::size_t i = 0; i < n; ++i) {
    pj[i] = 0.5 * (1.0 - runs[i].final_g);
    fid[i] = runs[i].final_fidelity;
    e.detections += runs[i].detection_time.has_value();
  }
  e.p_jump = mean_of(pj);
  e.p_jump_se = se_of(pj);
  e.mean_fidelity = mean_of(fid);
  const std::size_t n_times = config.sample_times.size();
  const std::size_t n_obs = config.code->num_generators() + config.extra_observables.size();
  e.sample_mean.assign(n_times, std::vector<double>(n_obs, 0.0));
  e.sample_se.assign(n_times, std::vector<double>(n_obs, 0.0));
  std::vector<double> col(n);
  for (std::size_t t = 0; t < n_times; ++t) {
    for (std::size_t j = 0; j < n_obs; ++j) {
      for (std::size_t i = 0; i < n; ++i) col[i] = runs[i].samples[t].empty() ? 1.0 : runs[i].samples[t][j];
      e.sample_mean[t][j] = mean_of(col);
      e.sample_se[t][j] = se_of(col);
    }
  }
  if (on_final) {
    for (std::size_t i = 0; i < n; ++i) on_final(i, runs[i]);
  }
  return e;
}

// ---------------------------------------------------------------------------

Eigen::Matrix3cd moment_matrix(double theta, double omega, double kappa, double t) {
  const double wh = theta * omega / kTwoPi;
  const double s = std::sin(2.0 * omega * t);
  const double c = std::cos(2.0 * omega * t);
  Eigen::Matrix3cd a;
  a << 0.0, -2.0 * kI * omega, -2.0 * wh * s,
       -2.0 * kI * omega, -2.0 * kappa, -2.0 * kI * wh * c,
       2.0 * wh * s, -2.0 * kI * wh * c, -2.0 * kappa;
  return a;
}

namespace {

Eigen::Vector3cd rk4_step(double theta, double omega, double kappa, double t, double h, const Eigen::Vector3cd& y) {
  const Eigen::Vector3cd k1 = moment_matrix(theta, omega, kappa, t) * y;
  const Eigen::Matrix3cd am = moment_matrix(theta, omega, kappa, t + 0.5 * h);
  const Eigen::Vector3cd k2 = am * (y + 0.5 * h * k1);
  const Eigen::Vector3cd k3 = am * (y + 0.5 * h * k2);
  const Eigen::Vector3cd k4 = moment_matrix(theta, omega, kappa, t + h) * (y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

MomentVector to_moments(const Eigen::Vector3cd& y) { return {y(0), y(1), y(2)}; }

}  // namespace

MomentTrajectory integrate_moment_ode(double theta, double omega, double kappa, double t_final, std::size_t samples,
                                      double omega_dt) {
  if (!(omega > 0.0 && kappa >= 0.0 && t_final >= 0.0 && omega_dt > 0.0)) {
    throw std::invalid_argument("moment equations need omega > 0, kappa >= 0, T >= 0");
  }
  MomentTrajectory out;
  Eigen::Vector3cd y(1.0, 0.0, 0.0);
  const double h_nominal = omega_dt / omega;
  const std::size_t segments = std::max<std::size_t>(samples, 1);
  if (samples) out.samples.push_back({0.0, to_moments(y)});
  double t = 0.0;
  for (std::size_t seg = 1; seg <= segments; ++seg) {
    const double t_end = t_final * static_cast<double>(seg) / static_cast<double>(segments);
    while (t < t_end) {
      double h = std::min(h_nominal, t_end - t);
      if (t + h >= t_end - 1e-12 * h_nominal) h = t_end - t;
      while (true) {
        const Eigen::Vector3cd full = rk4_step(theta, omega, kappa, t, h, y);
        const Eigen::Vector3cd half = rk4_step(theta, omega, kappa, t + 0.5 * h, 0.5 * h,
                                               rk4_step(theta, omega, kappa, t, 0.5 * h, y));
        if ((full - half).norm() <= 1e-9 || h < 1e-12 * h_nominal) {
          y = half;
          break;
        }
        h *= 0.5;
        ++out.rejected_steps;
      }
      t = (t_end - t - h <= 1e-12 * h_nominal) ? t_end : t + h;
      ++out.steps;
    }
    if (samples) out.samples.push_back({t, to_moments(y)});
  }
  out.final = to_moments(y);
  return out;
}

double confinement_probability(double theta, double omega, double kappa) {
  const double r = omega / kappa;
  return 0.5 * (1.0 + (1.0 - r * theta * theta / kTwoPi) * std::exp(-4.0 * kPi * r));
}

double jump_probability_from_moments(const MomentVector& x) { return 0.5 * (1.0 - x[0].real()); }

// ---------------------------------------------------------------------------

SymmetryReport generator_symmetry_check(const ContinuousRunConfig& config, std::size_t num_times, unsigned threads) {
  config.validate();
  if (num_times < 2) throw std::invalid_argument("need at least two sample times");
  SymmetryReport rep;
  const auto& gens = config.code->generators();
  std::vector<std::size_t> commuting;
  for (std::size_t j = 0; j < gens.size(); ++j) {
    (anticommutes(gens[j], config.x) ? rep.anticommuting : commuting).push_back(j);
  }
  for (std::size_t a = 0; a < rep.anticommuting.size(); ++a) {
    for (std::size_t b = a + 1; b < rep.anticommuting.size(); ++b) {
      rep.even_products.push_back(gens[rep.anticommuting[a]] * gens[rep.anticommuting[b]]);
    }
  }
  for (std::size_t j : commuting) rep.even_products.push_back(gens[j]);

  ContinuousRunConfig cfg = config;
  cfg.detector.enabled = false;
  cfg.extra_observables = rep.even_products;
  const double t_final = cfg.total_time();
  cfg.sample_times.clear();
  for (std::size_t i = 0; i < num_times; ++i) {
    cfg.sample_times.push_back(t_final * static_cast<double>(i) / static_cast<double>(num_times - 1));
  }
  rep.times = cfg.sample_times;
  const std::size_t n = cfg.trajectories;
  std::vector<std::vector<std::vector<double>>> all(n);
  const auto ens = run_sse_ensemble(cfg, threads, [&](std::size_t i, const SseTrajectory& tr) { all[i] = tr.samples; });
  rep.mean = ens.sample_mean;
  rep.se = ens.sample_se;

  const std::size_t g = gens.size();
  std::vector<double> d(n);
  for (std::size_t t = 0; t < num_times; ++t) {
    for (std::size_t a = 0; a < rep.anticommuting.size(); ++a) {
      for (std::size_t b = a + 1; b < rep.anticommuting.size(); ++b) {
        for (std::size_t i = 0; i < n; ++i) d[i] = all[i][t][rep.anticommuting[a]] - all[i][t][rep.anticommuting[b]];
        rep.max_pairwise_z = std::max(rep.max_pairwise_z, std::abs(z_of(d)));
      }
    }
    for (std::size_t e = 0; e < rep.even_products.size(); ++e) {
      for (std::size_t i = 0; i < n; ++i) d[i] = all[i][t][g + e] - 1.0;
      rep.max_even_deviation = std::max(rep.max_even_deviation, std::abs(mean_of(d)));
      const double z = std::abs(mean_of(d)) < 1e-9 ? 0.0 : std::abs(z_of(d));
      rep.max_even_z = std::max(rep.max_even_z, z);
    }
  }
  rep.passed = rep.max_pairwise_z < 3.0 && rep.max_even_z < 3.0;
  return rep;
}

SupermartingaleReport supermartingale_check(double kappa, double t_final, std::size_t trajectories,
                                            std::uint64_t seed, std::size_t num_times, double kappa_dt,
                                            bool start_eigenstate) {
  if (!(kappa > 0.0 && t_final > 0.0) || trajectories < 2 || num_times < 2) {
    throw std::invalid_argument("supermartingale check needs kappa, T > 0 and at least two trajectories and times");
  }
  const double sk = std::sqrt(kappa);
  // Measures Z on one qubit: (a, b) -> a |0> + b |1>.
  auto evolve = [&](cplx& a, cplx& b, double dt, std::size_t steps, std::mt19937_64& rng,
                    std::normal_distribution<double>& gauss) {
    for (std::size_t k = 0; k < steps; ++k) {
      const double m = std::norm(a) - std::norm(b);
      const double dw = std::sqrt(dt) * gauss(rng);
      const double drift = -0.5 * kappa * dt;
      // (g - m)^2 psi = (1 + m^2) psi - 2 m g psi with g = diag(1, -1).
      const double fa = 1.0 + drift * ((1.0 + m * m) - 2.0 * m) + sk * dw * (1.0 - m);
      const double fb = 1.0 + drift * ((1.0 + m * m) + 2.0 * m) + sk * dw * (-1.0 - m);
      a *= fa;
      b *= fb;
      const double nrm = std::sqrt(std::norm(a) + std::norm(b));
      if (!(nrm > 1e-8) || !std::isfinite(nrm)) throw NumericalFailure("one-qubit SSE norm collapsed");
      a /= nrm;
      b /= nrm;
    }
  };
  // 1 - m^2 = 4 |a|^2 |b|^2 for a normalised state. The product form avoids cancellation near the poles,
  // where rounding noise in v would otherwise bias the conditional increments.
  auto variance = [](cplx a, cplx b) { return 4.0 * std::norm(a) * std::norm(b); };
  auto start = [&](cplx& a, cplx& b) {
    if (start_eigenstate) {
      a = 1.0;
      b = 0.0;
    } else {
      a = b = 1.0 / std::sqrt(2.0);
    }
  };

  SupermartingaleReport rep;
  const double dt = kappa_dt / kappa;
  const std::size_t per_interval =
      static_cast<std::size_t>(std::max(1.0, std::round(t_final / static_cast<double>(num_times - 1) / dt)));
  const double dt_used = t_final / static_cast<double>(num_times - 1) / static_cast<double>(per_interval);
  std::vector<std::vector<double>> var(num_times, std::vector<double>(trajectories));
  for (std::size_t i = 0; i < trajectories; ++i) {
    auto rng = trajectory_stream(seed, i);
    std::normal_distribution<double> gauss;
    cplx a, b;
    start(a, b);
    for (std::size_t t = 0; t < num_times; ++t) {
      if (t > 0) evolve(a, b, dt_used, per_interval, rng, gauss);
      var[t][i] = variance(a, b);
    }
  }
  for (std::size_t t = 0; t < num_times; ++t) {
    rep.times.push_back(dt_used * static_cast<double>(per_interval * t));
    rep.mean_variance.push_back(mean_of(var[t]));
    rep.se_variance.push_back(se_of(var[t]));
  }
  rep.max_increase_z = -std::numeric_limits<double>::infinity();
  rep.max_conditional_z = -std::numeric_limits<double>::infinity();
  std::vector<double> d(trajectories);
  std::vector<std::size_t> order(trajectories);
  for (std::size_t t = 0; t + 1 < num_times; ++t) {
    for (std::size_t i = 0; i < trajectories; ++i) d[i] = var[t + 1][i] - var[t][i];
    rep.max_increase_z = std::max(rep.max_increase_z, z_of(d));
    // Conditional means: quartiles of v(s).
    for (std::size_t i = 0; i < trajectories; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return var[t][x] < var[t][y]; });
    const std::size_t bins = 4;
    for (std::size_t b = 0; b < bins; ++b) {
      const std::size_t lo = b * trajectories / bins;
      const std::size_t hi = (b + 1) * trajectories / bins;
      if (hi - lo < 30) continue;
      std::vector<double> db;
      for (std::size_t k = lo; k < hi; ++k) db.push_back(d[order[k]]);
      rep.max_conditional_z = std::max(rep.max_conditional_z, z_of(db));
    }
  }

  // Initial drift: Richardson combination of the slopes over h and 2h.
  const double h = 0.005 / kappa;
  const double fine = 1e-4 / kappa;
  const auto fine_steps = static_cast<std::size_t>(std::round(h / fine));
  std::vector<double> est(trajectories);
  for (std::size_t i = 0; i < trajectories; ++i) {
    auto rng = trajectory_stream(seed ^ 0x5bd1e995ULL, i);
    std::normal_distribution<double> gauss;
    cplx a, b;
    start(a, b);
    const double v0 = variance(a, b);
    evolve(a, b, fine, fine_steps, rng, gauss);
    const double v1 = variance(a, b);
    evolve(a, b, fine, fine_steps, rng, gauss);
    const double v2 = variance(a, b);
    est[i] = 2.0 * (v1 - v0) / h - (v2 - v0) / (2.0 * h);
  }
  rep.drift0 = mean_of(est);
  rep.drift0_se = se_of(est);
  const double z99 = 2.3263478740408408;
  rep.non_increasing = rep.max_increase_z < z99 && rep.max_conditional_z < z99;
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

using boost::math::quadrature::gauss_kronrod;

template <typename F>
double gk(F f, double a, double b) {
  if (!(b > a)) return 0.0;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 10, 1e-11);
}

}  // namespace

StationaryDensity::StationaryDensity(double omega, double kappa, double x0) : omega_(omega), kappa_(kappa) {
  if (!(omega > 0.0 && kappa > 0.0)) throw std::invalid_argument("stationary density needs omega, kappa > 0");
  const double k = x0 / (kPi / 2.0);
  if (std::abs(k - std::round(k)) > 1e-12) {
    throw std::invalid_argument("x0 must be a multiple of pi/2; otherwise the density is not normalizable");
  }
  r_ = omega / kappa;
  half_period_mass_ = mass_up_to_c(-std::numeric_limits<double>::infinity());
  z_ = 2.0 * half_period_mass_;
}

double StationaryDensity::unnormalized_c(double c) const {
  const double r = r_;
  const double q = 1.0 + c * c;
  auto f = [&](double s) {
    const double cs = c + s;
    return std::exp(-r * s) * std::pow(q / (1.0 + cs * cs), 1.5);
  };
  double total = 0.0;
  if (c < 0.0) {
    const double s0 = -c;
    const double w = 30.0;
    total += gk(f, 0.0, std::max(0.0, s0 - w));
    total += gk(f, std::max(0.0, s0 - w), s0 + w);
    total += gk(f, s0 + w, s0 + w + 40.0 / r);
    total += gk(f, s0 + w + 40.0 / r, std::numeric_limits<double>::infinity());
  } else {
    total += gk(f, 0.0, c + 1.0);
    total += gk(f, c + 1.0, c + 1.0 + 40.0 / r);
    total += gk(f, c + 1.0 + 40.0 / r, std::numeric_limits<double>::infinity());
  }
  return 0.5 * total;
}

double StationaryDensity::mass_up_to_c(double c) const {
  // Mass of (0, u] with cot 2u = c, written as int_c^inf f(c') / (2 (1 + c'^2)) dc'.
  auto g = [&](double cc) { return unnormalized_c(cc) / (2.0 * (1.0 + cc * cc)); };
  std::vector<double> bp{std::numeric_limits<double>::infinity(), 1.0, 0.0};
  for (double k : {0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 64.0}) bp.push_back(-k / r_);
  bp.push_back(-std::numeric_limits<double>::infinity());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const double hi = bp[i];
    const double lo = std::max(bp[i + 1], c);
    if (lo >= hi) continue;
    total += gauss_kronrod<double, 31>::integrate(g, lo, hi, 10, 1e-10);
  }
  return total;
}

double StationaryDensity::unnormalized(double x) const {
  double u = std::fmod(x, kPi / 2.0);
  if (u < 0.0) u += kPi / 2.0;
  const double s = std::sin(2.0 * u);
  if (s <= 0.0) return 1.0 / (2.0 * r_);
  return unnormalized_c(std::cos(2.0 * u) / s);
}

double StationaryDensity::operator()(double x) const { return unnormalized(x) / z_; }

double StationaryDensity::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= kPi) return 1.0;
  const double k = std::floor(x / (kPi / 2.0));
  const double u = x - k * kPi / 2.0;
  double mass = k * half_period_mass_;
  const double s = std::sin(2.0 * u);
  if (s > 0.0) mass += mass_up_to_c(std::cos(2.0 * u) / s);
  return std::clamp(mass / z_, 0.0, 1.0);
}

double StationaryDensity::flux() const { return -kappa_ / (2.0 * z_); }

std::vector<double> sample_one_qubit_sde(double omega, double kappa, double t_final, std::size_t n,
                                         std::uint64_t seed, double kappa_dt, unsigned threads) {
  if (!(kappa > 0.0 && t_final > 0.0 && kappa_dt > 0.0)) throw std::invalid_argument("bad SDE parameters");
  const auto steps = static_cast<std::size_t>(std::round(t_final * kappa / kappa_dt));
  const double dt = t_final / static_cast<double>(steps);
  const double sk = std::sqrt(kappa);
  const double sdt = std::sqrt(dt);
  std::vector<double> out(n);
  // Trajectories advance in interleaved blocks so independent steps overlap in the pipeline.
  constexpr std::size_t kLanes = 8;
  const std::size_t blocks = (n + kLanes - 1) / kLanes;
  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::size_t first = b * kLanes;
    const std::size_t lanes = std::min(kLanes, n - first);
    std::array<std::mt19937_64, kLanes> rng;
    std::array<boost::random::normal_distribution<double>, kLanes> gauss;  // ziggurat
    std::array<double, kLanes> x{};
    for (std::size_t l = 0; l < lanes; ++l) {
      rng[l] = trajectory_stream(seed, first + l);
      x[l] = kPi * uniform01(rng[l]);
    }
    for (std::size_t k = 0; k < steps; ++k) {
      for (std::size_t l = 0; l < lanes; ++l) {
        const double dw = sdt * gauss[l](rng[l]);
        const double s2 = std::sin(2.0 * x[l]);
        const double s4 = 2.0 * s2 * std::cos(2.0 * x[l]);
        // Milstein: b = -sqrt(kappa) sin 2x, (1/2) b b' = (kappa/2) sin 4x.
        x[l] += -(omega + 0.5 * kappa * s4) * dt - sk * s2 * dw + 0.5 * kappa * s4 * (dw * dw - dt);
      }
    }
    for (std::size_t l = 0; l < lanes; ++l) {
      double v = std::fmod(x[l], kPi);
      if (v < 0.0) v += kPi;
      out[first + l] = v;
    }
  });
  return out;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

// ---------------------------------------------------------------------------

namespace {

struct DenseModel {
  Eigen::MatrixXcd h, x, hx, id;
  std::vector<Eigen::MatrixXcd> gens;
  double omega, omega_h, kappa;
  Eigen::MatrixXcd rho0;
  std::size_t channel;

  explicit DenseModel(const ContinuousRunConfig& cfg) {
    const std::size_t n = cfg.code->n();
    h = to_dense(cfg.h);
    x = to_dense(cfg.x);
    hx = h * x;
    id = Eigen::MatrixXcd::Identity(h.rows(), h.cols());
    for (const auto& g : cfg.code->generators()) gens.push_back(to_dense(g));
    omega = cfg.omega;
    omega_h = cfg.theta * cfg.omega / kTwoPi;
    kappa = cfg.kappa;
    const StateVector psi = logical_state(*cfg.code, cfg.logical_state);
    const Eigen::VectorXcd v = psi.to_eigen();
    rho0 = v * v.adjoint();
    channel = first_anticommuting(*cfg.code, cfg.x);
    (void)n;
  }

  Eigen::MatrixXcd v(double t) const {
    return (std::cos(omega_h * t) * id + kI * std::sin(omega_h * t) * h) *
           (std::cos(omega * t) * id + kI * std::sin(omega * t) * x);
  }

  Eigen::MatrixXcd lab_rhs(double t, const Eigen::MatrixXcd& rho) const {
    const Eigen::MatrixXcd u = v(t);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
    for (const auto& g : gens) {
      const Eigen::MatrixXcd gt = u * g * u.adjoint();
      out += kappa * (gt * rho * gt - rho);
    }
    return out;
  }

  Eigen::MatrixXcd rot_rhs(double t, const Eigen::MatrixXcd& rho) const {
    const Eigen::MatrixXcd k =
        omega * x + omega_h * (std::cos(2.0 * omega * t) * h + kI * std::sin(2.0 * omega * t) * hx);
    Eigen::MatrixXcd out = -kI * (k * rho - rho * k);
    for (const auto& g : gens) out += kappa * (g * rho * g - rho);
    return out;
  }

  template <typename Rhs>
  static Eigen::MatrixXcd rk4(const Rhs& f, double t, double h, const Eigen::MatrixXcd& y) {
    const Eigen::MatrixXcd k1 = f(t, y);
    const Eigen::MatrixXcd k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const Eigen::MatrixXcd k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const Eigen::MatrixXcd k4 = f(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
};

}  // namespace

Eigen::MatrixXcd lindblad_lab_state(const ContinuousRunConfig& config, double t_final, double omega_dt) {
  config.validate();
  if (config.code->n() > kDefaultDenseLimit) throw std::length_error("dense limit exceeded");
  const DenseModel m(config);
  const double h_nom = omega_dt / config.omega;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(t_final / h_nom)));
  const double h = t_final / static_cast<double>(steps);
  Eigen::MatrixXcd rho = m.rho0;
  auto f = [&](double t, const Eigen::MatrixXcd& r) { return m.lab_rhs(t, r); };
  for (std::size_t k = 0; k < steps; ++k) rho = DenseModel::rk4(f, static_cast<double>(k) * h, h, rho);
  return rho;
}

FrameConsistencyReport rotating_frame_consistency(const ContinuousRunConfig& config, std::size_t num_times,
                                                  double omega_dt) {
  config.validate();
  if (config.code->n() > kDefaultDenseLimit) throw std::length_error("dense limit exceeded");
  if (num_times < 2) throw std::invalid_argument("need at least two sample times");
  std::size_t anti = 0;
  for (const auto& g : config.code->generators()) anti += anticommutes(g, config.x) ? 1 : 0;
  if (anti != 1) throw std::invalid_argument("moment equations assume exactly one generator anticommuting with X");

  const DenseModel m(config);
  const double t_final = config.total_time();
  const auto ode = integrate_moment_ode(config.theta, config.omega, config.kappa, t_final, num_times - 1, omega_dt);
  const double h_nom = omega_dt / config.omega;
  const auto per = static_cast<std::size_t>(
      std::max(1.0, std::ceil(t_final / static_cast<double>(num_times - 1) / h_nom)));
  const double h = t_final / static_cast<double>((num_times - 1) * per);

  FrameConsistencyReport rep;
  Eigen::MatrixXcd lab = m.rho0;
  Eigen::MatrixXcd rot = m.rho0;
  auto fl = [&](double t, const Eigen::MatrixXcd& r) { return m.lab_rhs(t, r); };
  auto fr = [&](double t, const Eigen::MatrixXcd& r) { return m.rot_rhs(t, r); };
  const Eigen::MatrixXcd& g = m.gens[m.channel];
  double last_purity = std::numeric_limits<double>::infinity();
  rep.purity_non_increasing = true;
  std::size_t step = 0;
  for (std::size_t i = 0; i < num_times; ++i) {
    if (i > 0) {
      for (std::size_t k = 0; k < per; ++k, ++step) {
        const double t = static_cast<double>(step) * h;
        lab = DenseModel::rk4(fl, t, h, lab);
        const Eigen::MatrixXcd next = DenseModel::rk4(fr, t, h, rot);
        const double p = (next * next).trace().real();
        if (p > last_purity + 1e-12) rep.purity_non_increasing = false;
        last_purity = p;
        rot = next;
      }
    } else {
      last_purity = (rot * rot).trace().real();
    }
    const double t = static_cast<double>(step) * h;
    const Eigen::MatrixXcd u = m.v(t);
    rep.times.push_back(t);
    rep.g_lab.push_back((u * g * u.adjoint() * lab).trace().real());
    rep.g_rot.push_back((g * rot).trace().real());
    rep.g_ode.push_back(ode.samples[i].x[0].real());
    rep.purity_rot.push_back((rot * rot).trace().real());
    rep.max_lab_vs_rot = std::max(rep.max_lab_vs_rot, std::abs(rep.g_lab.back() - rep.g_rot.back()));
    rep.max_rot_vs_ode = std::max(rep.max_rot_vs_ode, std::abs(rep.g_rot.back() - rep.g_ode.back()));
  }
  return rep;
}

}  // namespace mbhqc
