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

#include "experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "mbhqc/codes.hpp"
#include "mbhqc/continuous.hpp"
#include "mbhqc/discrete.hpp"
#include "mbhqc/holonomy.hpp"
#include "mbhqc/qecc.hpp"
#include "mbhqc/rng.hpp"

namespace mbhqc::cli {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

/// Typed access to one JSON object; rejects fields nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string scope) : j_(j), scope_(std::move(scope)) {
    if (!j_.is_object()) throw ConfigError(scope_ + ": expected an object");
  }

  std::string path(const std::string& key) const { return scope_ + "." + key; }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key);
  }

  const json* raw(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    const json* v = raw(key);
    if (!v) return fallback;
    try {
      return v->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path(key) + ": wrong type (" + std::string(v->type_name()) + ")");
    }
  }

  double positive(const std::string& key, double fallback) {
    const double v = get<double>(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(path(key) + ": must be positive");
    return v;
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::size_t min = 1) {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_number_integer() || v->get<std::int64_t>() < static_cast<std::int64_t>(min)) {
      throw ConfigError(path(key) + ": must be an integer >= " + std::to_string(min));
    }
    return v->get<std::size_t>();
  }

  double angle(const std::string& key, double fallback) {
    const json* v = raw(key);
    return v ? parse_angle(*v, path(key)) : fallback;
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback, bool angles = false) {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_array() || v->empty()) throw ConfigError(path(key) + ": must be a non-empty array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string p = path(key) + "[" + std::to_string(i) + "]";
      if (angles) {
        out.push_back(parse_angle((*v)[i], p));
      } else if ((*v)[i].is_number()) {
        out.push_back((*v)[i].get<double>());
      } else {
        throw ConfigError(p + ": expected a number");
      }
    }
    return out;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) throw ConfigError(scope_ + ": unknown field '" + item.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string scope_;
  std::set<std::string> used_;
};

std::uint64_t resolve_seed(Fields& f, const RunOptions& o) {
  const auto s = f.get<std::uint64_t>("seed", 1);
  f.raw("out");
  f.raw("threads");
  return o.seed.value_or(s);
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.12g}", v);
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& file, const std::string& description, const std::vector<std::string>& columns)
      : out_(file) {
    if (!out_) throw std::runtime_error("cannot write " + file.string());
    out_ << "# " << description << "\n";
    row(columns);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

void write_json(const std::filesystem::path& file, const json& j) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << j.dump(2) << "\n";
}

void prepare_out(const RunOptions& o) { std::filesystem::create_directories(o.out); }

CodePtr code_field(Fields& f, const std::string& fallback) {
  const auto name = f.get<std::string>("code", fallback);
  try {
    return std::make_shared<const StabilizerCode>(builtin_code(name));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(f.path("code") + ": " + e.what());
  }
}

PauliOperator pauli_field(Fields& f, const std::string& key, const std::string& fallback, std::size_t n) {
  const auto text = f.get<std::string>(key, fallback);
  PauliOperator p(0);
  try {
    p = PauliOperator::parse(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(f.path(key) + ": " + e.what());
  }
  if (p.num_qubits() != n) throw ConfigError(f.path(key) + ": expected " + std::to_string(n) + " qubits");
  return p;
}

void check_path(Fields& f, const StabilizerCode& code, const PauliOperator& h, const PauliOperator& x) {
  try {
    validate_path_operators(code, h, x);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(f.path("h") + "/" + f.path("x") + ": " + e.what());
  }
}

std::vector<cplx> logical_state_field(Fields& f) {
  const json* v = f.raw("logical_state");
  std::vector<cplx> out;
  if (!v) return out;
  if (!v->is_array()) throw ConfigError(f.path("logical_state") + ": must be an array");
  for (const auto& a : *v) {
    if (a.is_number()) {
      out.emplace_back(a.get<double>(), 0.0);
    } else if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number()) {
      out.emplace_back(a[0].get<double>(), a[1].get<double>());
    } else {
      throw ConfigError(f.path("logical_state") + ": entries must be numbers or [re, im]");
    }
  }
  return out;
}

CorrectionPolicy policy_value(const std::string& text, const std::string& where) {
  try {
    return parse_correction_policy(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

DetectorConfig detector_field(Fields& f) {
  DetectorConfig d;
  const json* v = f.raw("detector");
  if (!v) return d;
  Fields g(*v, f.path("detector"));
  d.enabled = g.get<bool>("enabled", true);
  d.kappa_window = g.positive("kappa_window", d.kappa_window);
  d.threshold = g.positive("threshold", d.threshold);
  g.finish();
  return d;
}

json detector_json(const DetectorConfig& d) {
  return {{"enabled", d.enabled}, {"kappa_window", d.kappa_window}, {"threshold", d.threshold}};
}

/// Library preconditions reported as configuration problems.
template <class F>
auto as_config(const std::string& scope, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(scope + ": " + e.what());
  }
}

}  // namespace

json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    json j = json::parse(text, nullptr, true, true);
    if (!j.is_object()) throw ConfigError(path.string() + ": top level must be an object");
    return j;
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
    const std::size_t bol = text.rfind('\n', byte ? byte - 1 : 0);
    const std::size_t col = bol == std::string::npos ? byte : byte - bol - 1;
    throw ConfigError(fmt::format("{}:{}:{}: {}", path.string(), line, col, e.what()));
  }
}

double parse_angle(const json& value, const std::string& field) {
  if (value.is_number()) return value.get<double>();
  if (!value.is_string()) throw ConfigError(field + ": expected a number or a string such as \"pi/6\"");
  std::string s = value.get<std::string>();
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  auto to_double = [&](std::string_view t) {
    double v = 0.0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size()) throw ConfigError(field + ": cannot parse '" + s + "'");
    return v;
  };
  const auto pi = s.find("pi");
  if (pi == std::string::npos) return to_double(s);
  std::string_view pre(s.data(), pi);
  std::string_view post(s.data() + pi + 2, s.size() - pi - 2);
  double v = kPi;
  if (!pre.empty()) {
    if (pre.back() == '*') pre.remove_suffix(1);
    v *= pre == "-" ? -1.0 : to_double(pre);
  }
  if (!post.empty()) {
    if (post.front() != '/') throw ConfigError(field + ": cannot parse '" + s + "'");
    v /= to_double(post.substr(1));
  }
  return v;
}

// ---------------------------------------------------------------------------

json discrete_sweep(const json& config, const RunOptions& options) {
  Fields f(config, "discrete-sweep");
  const auto seed = resolve_seed(f, options);
  const CodePtr code = code_field(f, "bitflip3");
  const auto h = pauli_field(f, "h", "XXX", code->n());
  const auto x = pauli_field(f, "x", "XIZ", code->n());
  check_path(f, *code, h, x);
  const double theta = f.angle("theta", kPi / 6.0);
  const auto trajectories = f.count("trajectories", 2000);
  std::vector<double> grid;
  if (f.has("steps_per_loop")) {
    if (f.has("dphi")) throw ConfigError("discrete-sweep: give either dphi or steps_per_loop");
    for (double s : f.numbers("steps_per_loop", {})) {
      if (s < 1.0) throw ConfigError(f.path("steps_per_loop") + ": entries must be >= 1");
      grid.push_back(2.0 * kPi / s);
    }
  } else {
    grid = f.numbers("dphi", {0.2, 0.1, 0.05, 0.02, 0.01}, true);
  }
  for (double d : grid) {
    if (!(d > 0.0) || d > kPi / 2) throw ConfigError(f.path("dphi") + ": entries must lie in (0, pi/2]");
  }
  std::vector<CorrectionPolicy> policies;
  const json* pj = f.raw("policies");
  if (pj) {
    if (!pj->is_array() || pj->empty()) throw ConfigError(f.path("policies") + ": must be a non-empty array");
    for (const auto& p : *pj) {
      if (!p.is_string()) throw ConfigError(f.path("policies") + ": entries must be strings");
      policies.push_back(policy_value(p.get<std::string>(), f.path("policies")));
    }
  } else {
    policies = {CorrectionPolicy::kNone, CorrectionPolicy::kCorrectToCode};
  }
  const auto mode_text = f.get<std::string>("mode", "full-projector");
  MeasurementMode mode;
  if (mode_text == "full-projector") {
    mode = MeasurementMode::kFullProjector;
  } else if (mode_text == "single-generator") {
    mode = MeasurementMode::kSingleGenerator;
  } else {
    throw ConfigError(f.path("mode") + ": expected full-projector or single-generator");
  }
  const double threshold = f.get<double>("success_threshold", 0.99);
  const auto logical = logical_state_field(f);
  f.finish();

  prepare_out(options);
  CsvWriter csv(options.out / "fig4.csv", "no-fault probability vs rotation increment",
                {"dphi", "policy", "trajectories", "p_no_fault", "ci95", "mean_final_fidelity"});
  json rows = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (const auto policy : policies) {
      DiscreteRunConfig c;
      c.code = code;
      c.h = h;
      c.x = x;
      c.theta = theta;
      c.dphi = grid[i];
      c.policy = policy;
      c.trajectories = trajectories;
      c.master_seed = mix64(seed ^ (i + 1));
      c.logical_state = logical;
      c.success_threshold = threshold;
      c.mode = mode;
      as_config("discrete-sweep", [&] { c.validate(); return 0; });
      const auto s = monte_carlo_no_fault(c, options.threads);
      csv.row({num(c.dphi), std::string(to_string(policy)), std::to_string(s.trajectories), num(s.p_no_fault),
               num(s.ci95), num(s.mean_final_fidelity)});
      rows.push_back({{"dphi", c.dphi},
                      {"policy", to_string(policy)},
                      {"point_seed", c.master_seed},
                      {"trajectories", s.trajectories},
                      {"no_fault", s.no_fault},
                      {"p_no_fault", s.p_no_fault},
                      {"ci95", s.ci95},
                      {"no_jump", s.no_jump},
                      {"p_no_jump", s.p_no_jump},
                      {"ci95_no_jump", s.ci95_no_jump},
                      {"p_no_jump_formula", discrete_no_jump_probability(theta, c.dphi)},
                      {"corrected", s.corrected},
                      {"mean_final_fidelity", s.mean_final_fidelity}});
    }
  }
  json summary = {{"command", "discrete-sweep"},
                  {"seed", seed},
                  {"code", code->name()},
                  {"h", h.to_string()},
                  {"x", x.to_string()},
                  {"theta", theta},
                  {"mode", mode_text},
                  {"config", config},
                  {"rows", rows}};
  write_json(options.out / "fig4.json", summary);
  return summary;
}

// ---------------------------------------------------------------------------

json continuous_sweep(const json& config, const RunOptions& options) {
  Fields f(config, "continuous-sweep");
  const auto seed = resolve_seed(f, options);
  if (!f.has("code")) throw ConfigError("continuous-sweep.code: required");
  const CodePtr code = code_field(f, "");
  const auto h = pauli_field(f, "h", "XXX", code->n());
  const auto x = pauli_field(f, "x", "XIZ", code->n());
  check_path(f, *code, h, x);
  const double theta = f.angle("theta", kPi / 2.0);
  const double kappa = f.positive("kappa", 1.0);
  std::vector<double> grid;
  if (const json* g = f.raw("omega_over_kappa"); g && g->is_object()) {
    Fields gf(*g, f.path("omega_over_kappa"));
    const double lo = gf.positive("min", 1e-3), hi = gf.positive("max", 1e-1);
    const auto points = gf.count("points", 9, 2);
    gf.finish();
    if (!(lo < hi)) throw ConfigError(f.path("omega_over_kappa") + ": min must be below max");
    for (std::size_t i = 0; i < points; ++i) {
      grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(points - 1)));
    }
  } else if (g) {
    grid = f.numbers("omega_over_kappa", {});
  } else {
    for (int i = 0; i < 9; ++i) grid.push_back(1e-3 * std::pow(100.0, i / 8.0));
  }
  const auto sse_points = f.numbers("sse_omega_over_kappa", {0.005, 0.02, 0.05});
  const auto trajectories = f.count("trajectories", 1000);
  const double kappa_dt = f.positive("kappa_dt", 1e-3);
  const double ode_dt = f.positive("ode_omega_dt", 1e-4);
  const auto policy = policy_value(f.get<std::string>("policy", "none"), f.path("policy"));
  const auto detector = detector_field(f);
  const auto logical = logical_state_field(f);
  f.finish();
  for (double r : grid) {
    if (!(r > 0.0)) throw ConfigError(f.path("omega_over_kappa") + ": entries must be positive");
  }
  for (double r : sse_points) {
    if (!(r > 0.0)) throw ConfigError(f.path("sse_omega_over_kappa") + ": entries must be positive");
  }

  std::vector<double> all = grid;
  all.insert(all.end(), sse_points.begin(), sse_points.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * b; }),
            all.end());
  auto runs_sse = [&](double r) {
    return std::any_of(sse_points.begin(), sse_points.end(), [&](double s) { return std::abs(s - r) <= 1e-12 * r; });
  };

  prepare_out(options);
  CsvWriter csv(options.out / "fig5.csv", "jump probability vs omega/kappa (formula, moment ODE, SSE ensemble)",
                {"omega_over_kappa", "p_jump_formula", "p_jump_ode", "p_jump_sse", "ci95"});
  json rows = json::array();
  for (std::size_t i = 0; i < all.size(); ++i) {
    const double r = all[i];
    const double omega = r * kappa;
    const double formula = 1.0 - confinement_probability(theta, omega, kappa);
    const auto ode = integrate_moment_ode(theta, omega, kappa, 2.0 * kPi / omega, 0, ode_dt);
    const double p_ode = jump_probability_from_moments(ode.final);
    json row = {{"omega_over_kappa", r}, {"p_jump_formula", formula}, {"p_jump_ode", p_ode}};
    double p_sse = std::nan(""), ci = std::nan("");
    if (runs_sse(r)) {
      ContinuousRunConfig c;
      c.code = code;
      c.h = h;
      c.x = x;
      c.theta = theta;
      c.kappa = kappa;
      c.omega = omega;
      c.kappa_dt = kappa_dt;
      c.trajectories = trajectories;
      c.master_seed = mix64(seed ^ (i + 1));
      c.logical_state = logical;
      c.detector = detector;
      c.policy = policy;
      as_config("continuous-sweep", [&] { c.validate(); return 0; });
      const auto e = run_sse_ensemble(c, options.threads);
      p_sse = e.p_jump;
      ci = 1.96 * e.p_jump_se;
      row["sse"] = {{"point_seed", c.master_seed}, {"trajectories", e.trajectories}, {"p_jump", e.p_jump},
                    {"p_jump_se", e.p_jump_se},    {"ci95", ci},                     {"mean_fidelity", e.mean_fidelity},
                    {"detections", e.detections}};
    }
    csv.row({num(r), num(formula), num(p_ode), num(p_sse), num(ci)});
    rows.push_back(row);
  }
  json summary = {{"command", "continuous-sweep"},
                  {"seed", seed},
                  {"code", code->name()},
                  {"h", h.to_string()},
                  {"x", x.to_string()},
                  {"theta", theta},
                  {"kappa", kappa},
                  {"kappa_dt", kappa_dt},
                  {"policy", to_string(policy)},
                  {"detector", detector_json(detector)},
                  {"config", config},
                  {"rows", rows}};
  write_json(options.out / "fig5.json", summary);
  return summary;
}

// ---------------------------------------------------------------------------

json detector_calib(const json& config, const RunOptions& options) {
  Fields f(config, "detector-calib");
  const auto seed = resolve_seed(f, options);
  const double kappa = f.positive("kappa", 1.0);
  const double kappa_window = f.positive("kappa_window", 0.5);
  const auto thresholds = f.numbers("thresholds", {2.0, 3.0, 4.0, 5.0, 6.0, 8.0});
  const auto realizations = f.count("realizations", 4000);
  const auto jump_window = f.count("jump_window", 10);
  const auto max_delay = f.count("max_delay_windows", 5);
  const auto per_window = f.count("samples_per_window", 50);
  const double trace_threshold = f.positive("trace_threshold", 4.0);
  const auto trace_windows = f.count("trace_windows", 3 * jump_window);
  f.finish();
  for (double h : thresholds) {
    if (!(h > 0.0)) throw ConfigError(f.path("thresholds") + ": entries must be positive");
  }

  prepare_out(options);
  CsvWriter csv(options.out / "detector_calib.csv", "CUSUM calibration on synthetic currents with one sign change",
                {"threshold", "kappa_window", "realizations", "success_fraction", "detected_in_time", "false_alarms",
                 "missed", "mean_delay_windows"});
  json rows = json::array();
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const auto c = as_config("detector-calib", [&] {
      return calibrate_detector(kappa, kappa_window, thresholds[i], realizations, mix64(seed ^ (i + 1)), jump_window,
                                max_delay, per_window);
    });
    csv.row({num(thresholds[i]), num(kappa_window), std::to_string(c.realizations), num(c.success_fraction),
             std::to_string(c.detected_in_time), std::to_string(c.false_alarms), std::to_string(c.missed),
             num(c.mean_delay_windows)});
    rows.push_back({{"threshold", thresholds[i]},
                    {"success_fraction", c.success_fraction},
                    {"detected_in_time", c.detected_in_time},
                    {"false_alarms", c.false_alarms},
                    {"missed", c.missed},
                    {"mean_delay_windows", c.mean_delay_windows}});
  }

  // One synthetic current for the trace file: mean +1, then -1 after jump_window windows.
  const double window = kappa_window / kappa;
  const double dt = window / static_cast<double>(per_window);
  auto rng = trajectory_stream(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0 / (2.0 * std::sqrt(kappa * dt)));
  std::vector<double> current(trace_windows * per_window);
  for (std::size_t k = 0; k < current.size(); ++k) current[k] = (k < jump_window * per_window ? 1.0 : -1.0) + normal(rng);
  std::vector<DetectorTraceRow> trace;
  const auto fired = detect_jump(current, dt, window, kappa, trace_threshold, &trace);
  CsvWriter tcsv(options.out / "detector_trace.csv", "CUSUM trace per window on a synthetic current",
                 {"t", "y", "S", "S_minus_m"});
  for (const auto& t : trace) tcsv.row({num(t.t), num(t.y), num(t.s), num(t.s_minus_m)});

  json summary = {{"command", "detector-calib"},
                  {"seed", seed},
                  {"kappa", kappa},
                  {"kappa_window", kappa_window},
                  {"jump_time", static_cast<double>(jump_window) * window},
                  {"trace_threshold", trace_threshold},
                  {"trace_detection_time", fired ? json(*fired) : json(nullptr)},
                  {"config", config},
                  {"rows", rows}};
  write_json(options.out / "detector_calib.json", summary);
  return summary;
}

// ---------------------------------------------------------------------------

namespace {

struct QecEntry {
  std::string name;
  std::string h;
  std::vector<std::string> candidates;
  std::optional<int> augment_s;  // unset: use the requirement
  std::string augment_x;
};

std::vector<QecEntry> default_qec_entries() {
  return {{"shor9", "ZIIZIIZII", {"XIIXIIXII"}, std::nullopt, ""},
          {"steane7", "ZZZZZZZ", {"XZIIIII"}, std::nullopt, "XZIIIII"},
          {"perfect5", "ZZZZZ", {"XIIII"}, std::nullopt, "XIIII"}};
}

json report_to_json(const ConditionReport& r, std::size_t max_listed) {
  json v = json::array();
  for (std::size_t i = 0; i < std::min(max_listed, r.violations.size()); ++i) {
    const auto& x = r.violations[i];
    v.push_back({{"d", x.d.to_string()}, {"case", x.case_number}, {"clause", to_string(x.clause)}});
  }
  return {{"passed", r.passed},          {"weight_ok", r.weight_ok},
          {"stabilizer_ok", r.stabilizer_ok}, {"logical_ok", r.logical_ok},
          {"num_violations", r.violations.size()}, {"violations", v}};
}

std::vector<double> loop_samples(std::size_t count) {
  std::vector<double> phis;
  for (std::size_t j = 0; j <= count; ++j) phis.push_back(2.0 * kPi * static_cast<double>(j) / static_cast<double>(count));
  return phis;
}

}  // namespace

json qec_report(const json& config, const RunOptions& options) {
  Fields f(config, "qec-report");
  const auto seed = resolve_seed(f, options);
  const double theta = f.angle("theta", kPi / 2.0);
  const auto cap = f.count("candidate_cap", 1'000'000);
  const auto listed = f.count("max_listed", 32);
  const auto samples = f.count("loop_samples", 7);
  std::vector<QecEntry> entries;
  if (const json* cj = f.raw("codes")) {
    if (!cj->is_array() || cj->empty()) throw ConfigError(f.path("codes") + ": must be a non-empty array");
    for (std::size_t i = 0; i < cj->size(); ++i) {
      Fields e((*cj)[i], f.path("codes") + "[" + std::to_string(i) + "]");
      QecEntry q;
      q.name = e.get<std::string>("name", "");
      if (q.name.empty()) throw ConfigError(e.path("name") + ": required");
      q.h = e.get<std::string>("h", "");
      if (q.h.empty()) throw ConfigError(e.path("h") + ": required");
      q.candidates = e.get<std::vector<std::string>>("candidates", {});
      if (const json* a = e.raw("augment")) {
        Fields af(*a, e.path("augment"));
        if (af.has("s")) {
          const auto s = af.count("s", 1);
          if (s > 2) throw ConfigError(af.path("s") + ": must be 1 or 2");
          q.augment_s = static_cast<int>(s);
        }
        q.augment_x = af.get<std::string>("x", "");
        af.finish();
      }
      e.finish();
      entries.push_back(std::move(q));
    }
  } else {
    entries = default_qec_entries();
  }
  f.finish();

  prepare_out(options);
  CsvWriter csv(options.out / "qec_report.csv", "rotated-code error correction report per builtin code",
                {"code", "n", "k", "d", "d_E", "d_E2", "num_syndromes", "s", "num_valid_x", "augmented_passed",
                 "augmented_max_residual"});
  json codes = json::array();
  for (const auto& q : entries) {
    const std::string scope = "qec-report." + q.name;
    const auto code = as_config(scope, [&] { return builtin_code(q.name); });
    const auto h = as_config(scope + ".h", [&] { return PauliOperator::parse(q.h); });
    if (h.num_qubits() != code.n()) throw ConfigError(scope + ".h: wrong number of qubits");
    const auto set = CorrectableSet::for_code(code);
    const auto req = ancilla_requirement(code, set);
    SearchOptions so;
    so.candidate_cap = cap;
    so.threads = options.threads;
    const auto search = search_x(code, h, set, so);
    json valid = json::array();
    for (std::size_t i = 0; i < std::min(listed, search.valid.size()); ++i) valid.push_back(search.valid[i].to_string());

    json candidates = json::array();
    for (const auto& text : q.candidates) {
      const auto x = as_config(scope + ".candidates", [&] { return PauliOperator::parse(text); });
      if (x.num_qubits() != code.n()) throw ConfigError(scope + ".candidates: wrong number of qubits");
      json cj = {{"x", x.to_string()}};
      try {
        validate_path_operators(code, h, x);
        cj["path_valid"] = true;
      } catch (const std::invalid_argument& e) {
        cj["path_valid"] = false;
        cj["path_error"] = e.what();
      }
      cj["in_search_results"] = std::find(search.valid.begin(), search.valid.end(), x) != search.valid.end();
      cj["conditions"] = report_to_json(sufficient_conditions_check(code, h, x, set), listed);
      if (code.n() <= kDefaultDenseLimit && cj["path_valid"].get<bool>()) {
        const auto rk = rotated_kl_check(code, h, x, theta, set, loop_samples(samples));
        cj["rotated_kl"] = {{"passed", rk.passed}, {"max_residual", rk.max_residual}};
      }
      candidates.push_back(cj);
    }

    json logical_pairs;
    if (code.n() <= kDefaultDenseLimit) {
      const auto p = logical_pair_check(code, h, set);
      std::map<std::string, std::size_t> counts;
      for (const auto& e : p.entries) ++counts[to_string(e.status)];
      logical_pairs = {{"passed", p.passed}, {"status_counts", counts}};
    }

    json augmented = nullptr;
    bool aug_passed = false;
    double aug_residual = std::nan("");
    const int s = q.augment_s.value_or(req.s);
    if (s > 0 && !q.augment_x.empty()) {
      const auto x = as_config(scope + ".augment.x", [&] { return PauliOperator::parse(q.augment_x); });
      const auto aug = as_config(scope + ".augment", [&] { return augment_code(code, s, h, x); });
      if (aug.code.n() <= kDefaultDenseLimit) {
        const auto rk = rotated_kl_check(aug.code, aug.h, aug.x, theta, aug.errors, loop_samples(samples));
        aug_passed = rk.passed;
        aug_residual = rk.max_residual;
        json per_phi = json::array();
        for (std::size_t i = 0; i < rk.phis.size(); ++i) {
          per_phi.push_back({{"phi", rk.phis[i]}, {"residual", rk.residual_per_phi[i]}});
        }
        augmented = {{"s", s},
                     {"n", aug.code.n()},
                     {"num_generators", aug.code.num_generators()},
                     {"h", aug.h.to_string()},
                     {"x", aug.x.to_string()},
                     {"num_errors", aug.errors.errors.size()},
                     {"rotated_kl", {{"passed", rk.passed}, {"max_residual", rk.max_residual}, {"samples", per_phi}}}};
      }
    }

    csv.row({code.name(), std::to_string(code.n()), std::to_string(code.k()), std::to_string(code.d()),
             std::to_string(req.d_e), std::to_string(req.d_e2), std::to_string(req.num_syndromes),
             std::to_string(req.s), std::to_string(search.valid.size()), augmented.is_null() ? "" : (aug_passed ? "1" : "0"),
             num(aug_residual)});
    codes.push_back({{"code", code.name()},
                     {"n", code.n()},
                     {"k", code.k()},
                     {"d", code.d()},
                     {"h", h.to_string()},
                     {"correctable_set", {{"max_weight", set.max_weight}, {"size", set.errors.size()}}},
                     {"ancilla", {{"d_E", req.d_e}, {"d_E2", req.d_e2}, {"num_syndromes", req.num_syndromes}, {"s", req.s}}},
                     {"search",
                      {{"candidates_examined", search.candidates_examined},
                       {"truncated", search.truncated},
                       {"num_valid", search.valid.size()},
                       {"valid", valid}}},
                     {"candidates", candidates},
                     {"logical_pairs", logical_pairs},
                     {"augmented", augmented}});
  }
  json summary = {{"command", "qec-report"}, {"seed", seed}, {"theta", theta}, {"config", config}, {"codes", codes}};
  write_json(options.out / "qec_report.json", summary);
  return summary;
}

// ---------------------------------------------------------------------------

json fokker_planck(const json& config, const RunOptions& options) {
  Fields f(config, "fokker-planck");
  const auto seed = resolve_seed(f, options);
  const double r = f.positive("omega_over_kappa", 0.01);
  const double kappa = f.positive("kappa", 1.0);
  const double x0 = f.angle("x0", 0.0);
  const auto grid_points = f.count("grid_points", 400, 2);
  const auto bins = f.count("histogram_bins", 60);
  std::size_t samples = 1000;
  double t_final = 1000.0, kappa_dt = 1e-3;
  if (const json* s = f.raw("sde")) {
    Fields sf(*s, f.path("sde"));
    samples = sf.count("samples", samples, 0);
    t_final = sf.positive("kappa_t_final", t_final);
    kappa_dt = sf.positive("kappa_dt", kappa_dt);
    sf.finish();
  }
  f.finish();
  const double omega = r * kappa;

  const auto density = as_config("fokker-planck", [&] { return StationaryDensity(omega, kappa, x0); });
  prepare_out(options);
  CsvWriter csv(options.out / "density.csv", "stationary density of the one-qubit mixture angle on [0, pi)",
                {"x", "p"});
  std::vector<double> xs, ps;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = kPi * (static_cast<double>(i) + 0.5) / static_cast<double>(grid_points);
    xs.push_back(x);
    ps.push_back(density(x));
    csv.row({num(x), num(ps.back())});
  }
  json peaks = json::array();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double left = ps[(i + ps.size() - 1) % ps.size()], right = ps[(i + 1) % ps.size()];
    if (ps[i] > left && ps[i] >= right) peaks.push_back({{"x", xs[i]}, {"p", ps[i]}});
  }

  json sde = nullptr;
  if (samples > 0) {
    const auto xs_sde = as_config("fokker-planck.sde", [&] {
      return sample_one_qubit_sde(omega, kappa, t_final / kappa, samples, seed, kappa_dt, options.threads);
    });
    CsvWriter hist(options.out / "density_histogram.csv", "SDE histogram against the stationary density per bin",
                   {"x_lo", "x_hi", "p_hist", "p_model"});
    std::vector<std::size_t> counts(bins, 0);
    for (double x : xs_sde) {
      const auto b = std::min(bins - 1, static_cast<std::size_t>(x / kPi * static_cast<double>(bins)));
      ++counts[b];
    }
    const double width = kPi / static_cast<double>(bins);
    double prev_cdf = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
      const double hi = width * static_cast<double>(b + 1);
      const double cdf = b + 1 == bins ? 1.0 : density.cdf(hi);
      hist.row({num(width * static_cast<double>(b)), num(hi),
                num(static_cast<double>(counts[b]) / (static_cast<double>(samples) * width)), num((cdf - prev_cdf) / width)});
      prev_cdf = cdf;
    }
    const double ks = ks_statistic(xs_sde, [&](double x) { return density.cdf(x); });
    const double crit = ks_critical_1pct(samples);
    sde = {{"samples", samples}, {"kappa_t_final", t_final}, {"kappa_dt", kappa_dt},
           {"ks_statistic", ks}, {"ks_critical_1pct", crit}, {"ks_rejected", ks > crit}};
  }
  json summary = {{"command", "fokker-planck"},
                  {"seed", seed},
                  {"omega_over_kappa", r},
                  {"kappa", kappa},
                  {"x0", x0},
                  {"normalization_constant", density.normalization()},
                  {"total_probability", density.cdf(kPi)},
                  {"flux", density.flux()},
                  {"peaks", peaks},
                  {"sde", sde},
                  {"config", config}};
  write_json(options.out / "fokker_planck.json", summary);
  return summary;
}

// ---------------------------------------------------------------------------

json single_run(const json& config, const RunOptions& options) {
  Fields f(config, "single-run");
  const auto seed = resolve_seed(f, options);
  const auto kind = f.get<std::string>("kind", "discrete");
  const CodePtr code = code_field(f, "bitflip3");
  const auto h = pauli_field(f, "h", "XXX", code->n());
  const auto x = pauli_field(f, "x", "XIZ", code->n());
  check_path(f, *code, h, x);
  const auto index = f.get<std::uint64_t>("trajectory", 0);
  const auto policy = policy_value(f.get<std::string>("policy", "none"), f.path("policy"));
  const auto logical = logical_state_field(f);
  prepare_out(options);
  json summary = {{"command", "single-run"}, {"kind", kind},         {"seed", seed},
                  {"trajectory", index},     {"code", code->name()}, {"h", h.to_string()},
                  {"x", x.to_string()},      {"policy", to_string(policy)}};

  if (kind == "discrete") {
    DiscreteRunConfig c;
    c.code = code;
    c.h = h;
    c.x = x;
    c.theta = f.angle("theta", kPi / 6.0);
    c.dphi = f.angle("dphi", 0.01);
    c.policy = policy;
    c.trajectories = 1;
    c.master_seed = seed;
    c.logical_state = logical;
    if (f.has("forced_jump_angle")) c.forced_jump_angle = f.angle("forced_jump_angle", 0.0);
    c.suppress_random_jumps = f.get<bool>("suppress_random_jumps", false);
    f.finish();
    as_config("single-run", [&] { c.validate(); return 0; });
    auto rng = trajectory_stream(seed, index);
    const auto t = run_discrete_trajectory(c, rng);
    json jumps = json::array();
    for (const auto& j : t.jump_events) {
      jumps.push_back({{"step", j.step}, {"angle", j.angle}, {"during_correction", j.during_correction}});
    }
    summary["theta"] = c.theta;
    summary["dphi"] = c.dphi;
    summary["steps"] = t.steps;
    summary["jumps"] = jumps;
    summary["fault_free"] = t.fault_free;
    summary["corrected"] = t.corrected;
    summary["final_fidelity"] = t.final_fidelity;
  } else if (kind == "continuous") {
    ContinuousRunConfig c;
    c.code = code;
    c.h = h;
    c.x = x;
    c.theta = f.angle("theta", kPi / 2.0);
    c.kappa = f.positive("kappa", 1.0);
    c.omega = f.positive("omega_over_kappa", 0.02) * c.kappa;
    c.kappa_dt = f.positive("kappa_dt", 1e-3);
    c.trajectories = 1;
    c.master_seed = seed;
    c.logical_state = logical;
    c.detector = detector_field(f);
    c.policy = policy;
    c.record_detector_trace = c.detector.enabled;
    const auto n_samples = f.count("samples", 200, 2);
    for (const auto& s : f.get<std::vector<std::string>>("extra_observables", {})) {
      const auto p = as_config(f.path("extra_observables"), [&] { return PauliOperator::parse(s); });
      if (p.num_qubits() != code->n()) throw ConfigError(f.path("extra_observables") + ": wrong number of qubits");
      c.extra_observables.push_back(p);
    }
    f.finish();
    for (std::size_t i = 0; i < n_samples; ++i) {
      c.sample_times.push_back(c.total_time() * static_cast<double>(i) / static_cast<double>(n_samples - 1));
    }
    as_config("single-run", [&] { c.validate(); return 0; });
    auto rng = trajectory_stream(seed, index);
    const auto t = integrate_sse(c, rng);
    std::vector<std::string> cols = {"t"};
    for (std::size_t j = 0; j < code->num_generators(); ++j) cols.push_back("g" + std::to_string(j));
    for (const auto& o : c.extra_observables) cols.push_back(o.to_string());
    CsvWriter csv(options.out / "trajectory.csv", "lab-frame expectations along one SSE trajectory", cols);
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
      std::vector<std::string> row = {num(c.sample_times[i])};
      for (double v : t.samples[i]) row.push_back(num(v));
      csv.row(row);
    }
    if (c.record_detector_trace) {
      CsvWriter tcsv(options.out / "detector_trace.csv", "CUSUM trace on the first anticommuting channel",
                     {"t", "y", "S", "S_minus_m"});
      for (const auto& r : t.detector_trace) tcsv.row({num(r.t), num(r.y), num(r.s), num(r.s_minus_m)});
    }
    summary["theta"] = c.theta;
    summary["kappa"] = c.kappa;
    summary["omega"] = c.omega;
    summary["dt"] = t.dt;
    summary["end_time"] = t.end_time;
    summary["detector"] = detector_json(c.detector);
    summary["detection_time"] = t.detection_time ? json(*t.detection_time) : json(nullptr);
    summary["corrected"] = t.corrected;
    summary["final_g"] = t.final_g;
    summary["p_jump"] = (1.0 - t.final_g) / 2.0;
    summary["final_fidelity"] = t.final_fidelity;
    summary["mean_norm_drift"] = t.mean_norm_drift;
  } else {
    throw ConfigError(f.path("kind") + ": expected discrete or continuous");
  }
  summary["config"] = config;
  write_json(options.out / "single_run.json", summary);
  return summary;
}

}  // namespace mbhqc::cli
