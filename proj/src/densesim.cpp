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

#include "mbhqc/densesim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mbhqc/rng.hpp"

namespace mbhqc {
namespace {

constexpr double kDeadBranch = 1e-14;

std::size_t dim_of(std::size_t n) {
  if (n >= 63) throw std::length_error("state vector too large");
  return std::size_t{1} << n;
}

void check_dims(const PauliOperator& p, std::size_t n) {
  if (p.num_qubits() != n) {
    throw std::invalid_argument("operator acts on " + std::to_string(p.num_qubits()) + " qubits, state has " +
                                std::to_string(n));
  }
}

double norm2(std::span<const cplx> v) {
  double s = 0.0;
  for (const auto& a : v) s += std::norm(a);
  return s;
}

}  // namespace

StateVector::StateVector(std::size_t n) : n_(n), amps_(dim_of(n), cplx{0.0, 0.0}) { amps_[0] = 1.0; }

StateVector::StateVector(std::size_t n, std::vector<cplx> amplitudes) : n_(n), amps_(std::move(amplitudes)) {
  if (amps_.size() != dim_of(n)) throw std::invalid_argument("amplitude vector has wrong length");
  if (normalize() < kDeadBranch) throw std::invalid_argument("cannot normalize a zero vector");
}

StateVector StateVector::basis(std::size_t n, std::size_t index) {
  StateVector s(n);
  if (index >= s.dim()) throw std::out_of_range("basis index out of range");
  s.amps_[0] = 0.0;
  s.amps_[index] = 1.0;
  return s;
}

StateVector StateVector::from_eigen(std::size_t n, const Eigen::VectorXcd& v) {
  return StateVector(n, std::vector<cplx>(v.data(), v.data() + v.size()));
}

Eigen::VectorXcd StateVector::to_eigen() const {
  return Eigen::Map<const Eigen::VectorXcd>(amps_.data(), static_cast<Eigen::Index>(amps_.size()));
}

double StateVector::norm() const { return std::sqrt(norm2(amps_)); }

double StateVector::normalize() {
  const double nrm = norm();
  if (nrm > 0.0) {
    for (auto& a : amps_) a /= nrm;
  }
  return nrm;
}

void StateVector::apply(const PauliOperator& p) {
  check_dims(p, n_);
  std::vector<cplx> out(amps_.size(), cplx{0.0, 0.0});
  apply_pauli_add(p, 1.0, amps_.data(), out.data());
  amps_.swap(out);
}

void StateVector::apply_rotation(const PauliOperator& p, double angle) {
  check_dims(p, n_);
  if (!p.is_hermitian()) throw std::invalid_argument("rotation axis must be Hermitian");
  std::vector<cplx> out(amps_.size());
  const double c = std::cos(angle);
  for (std::size_t i = 0; i < amps_.size(); ++i) out[i] = c * amps_[i];
  apply_pauli_add(p, cplx{0.0, std::sin(angle)}, amps_.data(), out.data());
  amps_.swap(out);
}

cplx StateVector::expectation(const PauliOperator& p) const {
  check_dims(p, n_);
  std::vector<cplx> out(amps_.size(), cplx{0.0, 0.0});
  apply_pauli_add(p, 1.0, amps_.data(), out.data());
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < amps_.size(); ++i) s += std::conj(amps_[i]) * out[i];
  return s;
}

cplx inner(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("state dimension mismatch");
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double fidelity(const StateVector& a, const StateVector& b) {
  return std::norm(inner(a, b)) / (norm2(a.amplitudes()) * norm2(b.amplitudes()));
}

void pauli_rotation(const PauliOperator& p, double angle, StateVector& psi) { psi.apply_rotation(p, angle); }

// ---------------------------------------------------------------------------

CompiledPauli::CompiledPauli(const PauliOperator& p)
    : x_mask(p.x_index_mask()),
      z_mask(p.z_index_mask()),
      phase(i_pow(p.phase_power() + static_cast<int>(p.y_count()))) {
  if (p.num_qubits() > 63) throw std::length_error("compiled Pauli limited to 63 qubits");
}

void CompiledPauli::apply_add(cplx coeff, std::span<const cplx> in, std::span<cplx> out) const {
  const cplx c = coeff * phase;
  const std::size_t dim = in.size();
  for (std::size_t i = 0; i < dim; ++i) {
    const bool odd = std::popcount(static_cast<std::uint64_t>(i) & z_mask) & 1;
    out[i ^ x_mask] += (odd ? -c : c) * in[i];
  }
}

// ---------------------------------------------------------------------------

PauliSum::PauliSum(const PauliOperator& p) { add(1.0, p); }

void PauliSum::add(cplx coeff, const PauliOperator& p) {
  const cplx c = coeff * i_pow(p.phase_power());
  const PauliOperator bare = p.with_phase(0);
  for (auto& t : terms_) {
    if (t.op == bare) {
      t.coeff += c;
      return;
    }
  }
  terms_.push_back({c, bare});
}

PauliSum PauliSum::conjugated_by_rotation(const PauliOperator& q, double angle) const {
  if (!q.is_hermitian()) throw std::invalid_argument("rotation axis must be Hermitian");
  PauliSum out;
  const double c2 = std::cos(2.0 * angle);
  const double s2 = std::sin(2.0 * angle);
  for (const auto& t : terms_) {
    if (commutes(t.op, q)) {
      out.add(t.coeff, t.op);
    } else {
      out.add(t.coeff * c2, t.op);
      out.add(t.coeff * cplx{0.0, -s2}, t.op * q);
    }
  }
  return out;
}

PauliSum PauliSum::operator*(const PauliSum& other) const {
  PauliSum out;
  for (const auto& a : terms_) {
    for (const auto& b : other.terms_) out.add(a.coeff * b.coeff, a.op * b.op);
  }
  return out;
}

void PauliSum::apply_add(cplx coeff, std::span<const cplx> in, std::span<cplx> out) const {
  for (const auto& t : terms_) CompiledPauli(t.op).apply_add(coeff * t.coeff, in, out);
}

StateVector PauliSum::apply(const StateVector& psi) const {
  StateVector out = psi;
  auto amps = out.amplitudes();
  std::fill(amps.begin(), amps.end(), cplx{0.0, 0.0});
  apply_add(1.0, psi.amplitudes(), amps);
  return out;
}

Eigen::MatrixXcd PauliSum::to_dense() const {
  if (terms_.empty()) throw std::logic_error("empty Pauli sum has no dimension");
  const std::size_t n = num_qubits();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(1 << n, 1 << n);
  for (const auto& t : terms_) m += t.coeff * mbhqc::to_dense(t.op);
  return m;
}

// ---------------------------------------------------------------------------

UnitaryProgram& UnitaryProgram::then_rotate(const PauliOperator& axis, double angle) {
  if (!axis.is_hermitian()) throw std::invalid_argument("rotation axis must be Hermitian");
  steps_.push_back({axis, angle});
  return *this;
}

UnitaryProgram& UnitaryProgram::then_pauli(const PauliOperator& p) {
  then_rotate(p, std::numbers::pi / 2.0);
  global_phase_ -= std::numbers::pi / 2.0;
  return *this;
}

UnitaryProgram& UnitaryProgram::then(const UnitaryProgram& next) {
  steps_.insert(steps_.end(), next.steps_.begin(), next.steps_.end());
  global_phase_ += next.global_phase_;
  return *this;
}

UnitaryProgram UnitaryProgram::inverse() const {
  std::vector<PauliRotation> inv;
  inv.reserve(steps_.size());
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) inv.push_back({it->axis, -it->angle});
  return UnitaryProgram(std::move(inv), -global_phase_);
}

void UnitaryProgram::apply(StateVector& psi) const {
  for (const auto& s : steps_) psi.apply_rotation(s.axis, s.angle);
  if (global_phase_ != 0.0) {
    const cplx ph = std::polar(1.0, global_phase_);
    for (auto& a : psi.amplitudes()) a *= ph;
  }
}

void UnitaryProgram::apply_inverse(StateVector& psi) const { inverse().apply(psi); }

PauliSum UnitaryProgram::conjugate(const PauliOperator& p) const {
  PauliSum s(p);
  for (const auto& step : steps_) s = s.conjugated_by_rotation(step.axis, step.angle);
  return s;
}

Eigen::MatrixXcd UnitaryProgram::to_dense(std::size_t n) const {
  const std::size_t dim = dim_of(n);
  Eigen::MatrixXcd u(dim, dim);
  for (std::size_t j = 0; j < dim; ++j) {
    StateVector col = StateVector::basis(n, j);
    apply(col);
    u.col(static_cast<Eigen::Index>(j)) = col.to_eigen();
  }
  return u;
}

// ---------------------------------------------------------------------------

ProjectorProgram ProjectorProgram::code_space(const StabilizerCode& code) {
  std::vector<PauliSum> obs;
  for (const auto& g : code.generators()) obs.emplace_back(g);
  return ProjectorProgram(std::move(obs));
}

ProjectorProgram ProjectorProgram::error_space(const StabilizerCode& code, const PauliOperator& error) {
  std::vector<PauliSum> obs;
  for (const auto& g : code.generators()) obs.emplace_back(commutes(g, error) ? g : -g);
  return ProjectorProgram(std::move(obs));
}

ProjectorProgram ProjectorProgram::rotated(const UnitaryProgram& frame) const {
  std::vector<PauliSum> obs;
  obs.reserve(observables_.size());
  for (const auto& o : observables_) {
    PauliSum s = o;
    for (const auto& step : frame.steps()) s = s.conjugated_by_rotation(step.axis, step.angle);
    obs.push_back(std::move(s));
  }
  return ProjectorProgram(std::move(obs));
}

void ProjectorProgram::apply(StateVector& psi) const {
  std::vector<cplx> tmp(psi.dim());
  for (const auto& o : observables_) {
    auto amps = psi.amplitudes();
    for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = 0.5 * amps[i];
    o.apply_add(0.5, amps, tmp);
    std::copy(tmp.begin(), tmp.end(), amps.begin());
  }
}

Eigen::MatrixXcd ProjectorProgram::to_dense(std::size_t n) const {
  const std::size_t dim = dim_of(n);
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(dim, dim);
  for (const auto& o : observables_) {
    p = 0.5 * (Eigen::MatrixXcd::Identity(dim, dim) + o.to_dense()) * p;
  }
  return p;
}

// ---------------------------------------------------------------------------

RotatingObservable::RotatingObservable(const PauliOperator& g, std::vector<PauliOperator> axes)
    : num_axes_(axes.size()) {
  struct Raw {
    cplx constant;
    PauliOperator op;
    std::vector<Factor> factors;
  };
  std::vector<Raw> raw{{i_pow(g.phase_power()), g.with_phase(0), {}}};
  for (const auto& q : axes) {
    if (!q.is_hermitian()) throw std::invalid_argument("rotation axis must be Hermitian");
    if (q.num_qubits() != g.num_qubits()) throw std::invalid_argument("axis dimension mismatch");
    std::vector<Raw> next;
    next.reserve(2 * raw.size());
    for (auto& t : raw) {
      if (commutes(t.op, q)) {
        t.factors.push_back(Factor::kOne);
        next.push_back(std::move(t));
      } else {
        const PauliOperator pq = t.op * q;
        Raw s{t.constant * i_pow(pq.phase_power()), pq.with_phase(0), t.factors};
        s.factors.push_back(Factor::kMinusISin);
        t.factors.push_back(Factor::kCos);
        next.push_back(std::move(t));
        next.push_back(std::move(s));
      }
    }
    raw.swap(next);
  }
  for (auto& t : raw) {
    std::size_t idx = 0;
    while (idx < pattern_ops_.size() && !(pattern_ops_[idx] == t.op)) ++idx;
    if (idx == pattern_ops_.size()) {
      pattern_ops_.push_back(t.op);
      patterns_.emplace_back(t.op);
    }
    terms_.push_back({t.constant, idx, std::move(t.factors)});
  }
  if (g.num_qubits() <= 16) {
    const std::size_t dim = dim_of(g.num_qubits());
    for (const auto& p : patterns_) {
      std::vector<double> sg(dim);
      for (std::size_t i = 0; i < dim; ++i) sg[i] = (std::popcount(static_cast<std::uint64_t>(i) & p.z_mask) & 1) ? -1.0 : 1.0;
      signs_.push_back(std::move(sg));
    }
  }
}

void RotatingObservable::coefficients_trig(const double* c, const double* s, cplx* out) const {
  std::fill(out, out + patterns_.size(), cplx{0.0, 0.0});
  for (const auto& t : terms_) {
    cplx v = t.constant;
    for (std::size_t k = 0; k < num_axes_; ++k) {
      switch (t.factors[k]) {
        case Factor::kOne: break;
        case Factor::kCos: v *= c[k]; break;
        case Factor::kMinusISin: v *= cplx{0.0, -s[k]}; break;
      }
    }
    out[t.pattern] += v;
  }
}

void RotatingObservable::coefficients(std::span<const double> angles, std::vector<cplx>& out) const {
  if (angles.size() != num_axes_) throw std::invalid_argument("wrong number of frame angles");
  std::vector<double> c(num_axes_), s(num_axes_);
  for (std::size_t k = 0; k < num_axes_; ++k) {
    c[k] = std::cos(2.0 * angles[k]);
    s[k] = std::sin(2.0 * angles[k]);
  }
  out.resize(patterns_.size());
  coefficients_trig(c.data(), s.data(), out.data());
}

void RotatingObservable::apply_with(const std::vector<cplx>& coeffs, std::span<const cplx> in,
                                    std::span<cplx> out) const {
  apply_with(coeffs.data(), in, out);
}

void RotatingObservable::apply_with(const cplx* coeffs, std::span<const cplx> in, std::span<cplx> out) const {
  std::fill(out.begin(), out.end(), cplx{0.0, 0.0});
  if (!signs_.empty() && signs_.front().size() == in.size()) {
    const auto* src = reinterpret_cast<const double*>(in.data());
    auto* dst = reinterpret_cast<double*>(out.data());
    for (std::size_t k = 0; k < patterns_.size(); ++k) {
      const cplx c = coeffs[k] * patterns_[k].phase;
      if (c == cplx{0.0, 0.0}) continue;
      const double cr = c.real();
      const double ci = c.imag();
      const double* sg = signs_[k].data();
      const std::size_t x = patterns_[k].x_mask;
      for (std::size_t i = 0; i < in.size(); ++i) {
        const double ar = sg[i] * src[2 * i];
        const double ai = sg[i] * src[2 * i + 1];
        const std::size_t j = i ^ x;
        dst[2 * j] += cr * ar - ci * ai;
        dst[2 * j + 1] += cr * ai + ci * ar;
      }
    }
    return;
  }
  for (std::size_t k = 0; k < patterns_.size(); ++k) {
    if (coeffs[k] != cplx{0.0, 0.0}) patterns_[k].apply_add(coeffs[k], in, out);
  }
}

void RotatingObservable::apply(std::span<const double> angles, std::span<const cplx> in, std::span<cplx> out) const {
  std::vector<cplx> coeffs;
  coefficients(angles, coeffs);
  apply_with(coeffs, in, out);
}

PauliSum RotatingObservable::to_sum(std::span<const double> angles) const {
  std::vector<cplx> coeffs;
  coefficients(angles, coeffs);
  PauliSum s;
  for (std::size_t k = 0; k < pattern_ops_.size(); ++k) s.add(coeffs[k], pattern_ops_[k]);
  return s;
}

RotatingProjector RotatingProjector::for_generators(const std::vector<PauliOperator>& generators,
                                                    const std::vector<int>& signs,
                                                    const std::vector<PauliOperator>& axes) {
  if (signs.size() != generators.size()) throw std::invalid_argument("one sign per generator required");
  std::vector<RotatingObservable> obs;
  for (std::size_t j = 0; j < generators.size(); ++j) {
    obs.emplace_back(signs[j] < 0 ? -generators[j] : generators[j], axes);
  }
  return RotatingProjector(std::move(obs));
}

void RotatingProjector::apply(std::span<const double> angles, StateVector& psi) const {
  std::vector<cplx> tmp(psi.dim());
  std::vector<cplx> coeffs;
  for (const auto& o : observables_) {
    auto amps = psi.amplitudes();
    o.coefficients(angles, coeffs);
    o.apply_with(coeffs, amps, tmp);
    for (std::size_t i = 0; i < tmp.size(); ++i) amps[i] = 0.5 * (amps[i] + tmp[i]);
  }
}

ProjectorProgram RotatingProjector::snapshot(std::span<const double> angles) const {
  std::vector<PauliSum> obs;
  for (const auto& o : observables_) obs.push_back(o.to_sum(angles));
  return ProjectorProgram(std::move(obs));
}

// ---------------------------------------------------------------------------

namespace {

template <typename ApplyP>
MeasurementResult branch(const StateVector& psi, int outcome, ApplyP&& apply_p) {
  StateVector in_range = psi;
  apply_p(in_range);
  const double total = norm2(psi.amplitudes());
  const double p1 = norm2(in_range.amplitudes()) / total;
  MeasurementResult r;
  r.outcome = outcome;
  if (outcome == 1) {
    r.probability = p1;
    r.state = std::move(in_range);
  } else {
    r.probability = std::max(0.0, 1.0 - p1);
    r.state = psi;
    auto out = r.state.amplitudes();
    auto pin = in_range.amplitudes();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= pin[i];
  }
  if (r.state.norm() < kDeadBranch) throw std::domain_error("measurement branch has vanishing norm");
  r.state.normalize();
  return r;
}

template <typename ApplyP>
MeasurementResult sample(const StateVector& psi, std::mt19937_64& rng, ApplyP&& apply_p) {
  StateVector in_range = psi;
  apply_p(in_range);
  const double total = norm2(psi.amplitudes());
  const double p1 = std::clamp(norm2(in_range.amplitudes()) / total, 0.0, 1.0);
  const double u = uniform01(rng);
  MeasurementResult r;
  if (u < p1) {
    r.outcome = 1;
    r.probability = p1;
    r.state = std::move(in_range);
  } else {
    r.outcome = 0;
    r.probability = 1.0 - p1;
    r.state = psi;
    auto out = r.state.amplitudes();
    auto pin = in_range.amplitudes();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= pin[i];
  }
  if (r.state.norm() < kDeadBranch) throw std::domain_error("measurement branch has vanishing norm");
  r.state.normalize();
  return r;
}

void apply_dense(const Eigen::MatrixXcd& p, StateVector& psi) {
  if (p.rows() != static_cast<Eigen::Index>(psi.dim()) || p.cols() != p.rows()) {
    throw std::invalid_argument("projector dimension mismatch");
  }
  const Eigen::VectorXcd v = p * psi.to_eigen();
  std::copy(v.data(), v.data() + v.size(), psi.amplitudes().begin());
}

}  // namespace

MeasurementResult measure_projector(const ProjectorProgram& projector, const StateVector& psi, std::mt19937_64& rng) {
  return sample(psi, rng, [&](StateVector& s) { projector.apply(s); });
}

MeasurementResult measure_projector(const Eigen::MatrixXcd& projector, const StateVector& psi, std::mt19937_64& rng) {
  return sample(psi, rng, [&](StateVector& s) { apply_dense(projector, s); });
}

MeasurementResult project_branch(const ProjectorProgram& projector, const StateVector& psi, int outcome) {
  return branch(psi, outcome, [&](StateVector& s) { projector.apply(s); });
}

MeasurementResult measure_projector(const RotatingProjector& projector, std::span<const double> angles,
                                    const StateVector& psi, std::mt19937_64& rng) {
  return sample(psi, rng, [&](StateVector& s) { projector.apply(angles, s); });
}

MeasurementResult project_branch(const RotatingProjector& projector, std::span<const double> angles,
                                 const StateVector& psi, int outcome) {
  return branch(psi, outcome, [&](StateVector& s) { projector.apply(angles, s); });
}

double projector_probability(const ProjectorProgram& projector, const StateVector& psi) {
  StateVector s = psi;
  projector.apply(s);
  return norm2(s.amplitudes()) / norm2(psi.amplitudes());
}

}  // namespace mbhqc
