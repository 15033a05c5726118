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

#include "mbhqc/qecc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "mbhqc/densesim.hpp"

namespace mbhqc {
namespace {

void check_dims(const StabilizerCode& code, const PauliOperator& p, const char* what) {
  if (p.num_qubits() != code.n()) {
    throw std::invalid_argument(std::string(what) + " must act on " + std::to_string(code.n()) + " qubits");
  }
}

void check_set(const StabilizerCode& code, const CorrectableSet& set) {
  if (set.errors.empty()) throw std::invalid_argument("correctable set is empty");
  for (const auto& e : set.errors) check_dims(code, e, "errors");
}

/// Columns of `m` multiplied by the Pauli `p`.
Eigen::MatrixXcd apply_to_columns(const PauliOperator& p, const Eigen::MatrixXcd& m) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m.rows(), m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) apply_pauli_add(p, 1.0, m.col(c).data(), out.col(c).data());
  return out;
}

/// Best scalar gamma with M ~ gamma I and the Frobenius residual.
std::pair<cplx, double> proportional_fit(const Eigen::MatrixXcd& m) {
  const cplx gamma = m.trace() / static_cast<double>(m.rows());
  const Eigen::MatrixXcd r = m - gamma * Eigen::MatrixXcd::Identity(m.rows(), m.cols());
  return {gamma, r.norm()};
}

struct KlEval {
  Eigen::MatrixXcd gamma;
  double max_residual = 0.0;
  std::optional<std::pair<std::size_t, std::size_t>> violation;
};

KlEval kl_on_basis(const Eigen::MatrixXcd& basis, const CorrectableSet& set, double tol) {
  const std::size_t m = set.errors.size();
  std::vector<Eigen::MatrixXcd> el;
  el.reserve(m);
  for (const auto& e : set.errors) el.push_back(apply_to_columns(e, basis));
  KlEval out;
  out.gamma = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t b = 0; b < m; ++b) {
    for (std::size_t a = 0; a < m; ++a) {
      const auto [g, res] = proportional_fit(el[b].adjoint() * el[a]);
      out.gamma(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = g;
      out.max_residual = std::max(out.max_residual, res);
      if (res > tol && !out.violation) out.violation = std::make_pair(b, a);
    }
  }
  return out;
}

bool valid_path_pair(const StabilizerCode& code, const PauliOperator& h, const PauliOperator& x) {
  if (!x.is_hermitian() || commutes(x, h)) return false;
  for (const auto& g : code.generators()) {
    if (anticommutes(x, g)) return true;
  }
  return false;
}

unsigned resolve_threads(unsigned threads, std::size_t work) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, work)));
}

}  // namespace

CorrectableSet CorrectableSet::up_to_weight(std::size_t n, std::size_t w) {
  CorrectableSet s;
  s.max_weight = w;
  s.errors.emplace_back(n);
  for (std::size_t k = 1; k <= std::min(w, n); ++k) {
    for_each_pauli_of_weight(n, k, [&](const PauliOperator& p) {
      s.errors.push_back(p);
      return true;
    });
  }
  return s;
}

CorrectableSet CorrectableSet::for_code(const StabilizerCode& code) {
  return up_to_weight(code.n(), code.d() >= 1 ? (code.d() - 1) / 2 : 0);
}

std::vector<PauliOperator> pair_products(const CorrectableSet& set) {
  std::vector<PauliOperator> out;
  std::unordered_set<PauliOperator, PauliHash> seen;
  for (const auto& a : set.errors) {
    for (const auto& b : set.errors) {
      PauliOperator p = (a * b).with_phase(0);
      if (seen.insert(p).second) out.push_back(std::move(p));
    }
  }
  return out;
}

std::size_t distinct_syndromes(const StabilizerCode& code, const std::vector<PauliOperator>& ops) {
  std::unordered_set<std::uint64_t> seen;
  for (const auto& p : ops) seen.insert(syndrome(code, p).packed());
  return seen.size();
}

KlResult kl_check(const StabilizerCode& code, const CorrectableSet& set, double tol, std::size_t dense_limit) {
  check_set(code, set);
  if (code.n() > dense_limit) throw std::length_error("kl_check: dense limit exceeded");
  const auto eval = kl_on_basis(code_basis(code, dense_limit), set, tol);
  KlResult r;
  r.gamma = eval.gamma;
  r.max_residual = eval.max_residual;
  r.violation = eval.violation;
  r.passed = !eval.violation.has_value();
  return r;
}

RotatedKlResult rotated_kl_check(const StabilizerCode& code, const PauliOperator& h, const PauliOperator& x,
                                 double theta, const CorrectableSet& set, const std::vector<double>& phis, double tol,
                                 std::size_t dense_limit) {
  check_set(code, set);
  check_dims(code, h, "H");
  check_dims(code, x, "X");
  if (code.n() > dense_limit) throw std::length_error("rotated_kl_check: dense limit exceeded");
  const Eigen::MatrixXcd basis = code_basis(code, dense_limit);
  RotatedKlResult r;
  r.phis = phis;
  for (double phi : phis) {
    Eigen::MatrixXcd rotated(basis.rows(), basis.cols());
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
      StateVector psi = StateVector::from_eigen(code.n(), basis.col(c));
      psi.apply_rotation(x, phi);
      psi.apply_rotation(h, theta * phi / (2.0 * std::numbers::pi));
      rotated.col(c) = psi.to_eigen();
    }
    const auto eval = kl_on_basis(rotated, set, tol);
    r.residual_per_phi.push_back(eval.max_residual);
    r.max_residual = std::max(r.max_residual, eval.max_residual);
  }
  r.passed = r.max_residual < tol;
  return r;
}

// ---------------------------------------------------------------------------

ConjugationSpan classify_conjugation(const PauliOperator& d, const PauliOperator& h, const PauliOperator& x) {
  const bool ch = commutes(h, d);
  const bool cx = commutes(x, d);
  ConjugationSpan t;
  if (ch && cx) {
    t.case_number = 1;
    t.operators = {d};
  } else if (ch) {
    t.case_number = 2;
    t.operators = {d, x * d, h * x * d};
  } else if (cx) {
    t.case_number = 3;
    t.operators = {d, h * d, h * x * d};
  } else {
    t.case_number = 4;
    t.operators = {d, h * d, x * d};
  }
  return t;
}

std::string to_string(Clause c) {
  switch (c) {
    case Clause::kWeight: return "weight";
    case Clause::kStabilizer: return "stabilizer";
    case Clause::kLogical: return "logical";
  }
  return "?";
}

std::size_t clause_radius(std::size_t d) {
  if (d < 2) return 0;
  return d % 2 == 0 ? d - 2 : d - 1;
}

namespace {

struct ConditionContext {
  const StabilizerCode& code;
  std::vector<PauliOperator> e2;
  std::vector<std::uint64_t> e2_syndromes;
  std::unordered_set<std::uint64_t> syndrome_set;

  ConditionContext(const StabilizerCode& c, const CorrectableSet& set) : code(c), e2(pair_products(set)) {
    for (const auto& d : e2) {
      e2_syndromes.push_back(syndrome(code, d).packed());
      syndrome_set.insert(e2_syndromes.back());
    }
  }

  ConditionReport check(const PauliOperator& h, const PauliOperator& x) const {
    ConditionReport rep;
    rep.weight_ok = weight(x) + 1 > code.d();
    const std::uint64_t sx = syndrome(code, x).packed();
    if (syndrome_set.count(sx)) {
      for (std::size_t i = 0; i < e2.size(); ++i) {
        if (e2_syndromes[i] != sx) continue;
        const PauliOperator& d = e2[i];
        const int c = classify_conjugation(d, h, x).case_number;
        const PauliOperator m = x * d;
        if (m.is_identity_up_to_phase()) {
          rep.violations.push_back({d, c, Clause::kWeight});
          rep.weight_ok = false;
        } else if (in_stabilizer_group(code, m.with_phase(0))) {
          if (commutes(x, d)) {
            rep.violations.push_back({d, c, Clause::kStabilizer});
            rep.stabilizer_ok = false;
          }
        } else if (!(commutes(h, d) && commutes(x, d))) {
          rep.violations.push_back({d, c, Clause::kLogical});
          rep.logical_ok = false;
        }
      }
    }
    rep.passed = rep.weight_ok && rep.violations.empty();
    return rep;
  }
};

}  // namespace

ConditionReport sufficient_conditions_check(const StabilizerCode& code, const PauliOperator& h, const PauliOperator& x,
                               const CorrectableSet& set) {
  check_set(code, set);
  check_dims(code, h, "H");
  check_dims(code, x, "X");
  return ConditionContext(code, set).check(h, x);
}

// ---------------------------------------------------------------------------

std::string to_string(LogicalPairStatus s) {
  switch (s) {
    case LogicalPairStatus::kProportional: return "proportional";
    case LogicalPairStatus::kExcludedIdentity: return "excluded-identity";
    case LogicalPairStatus::kNotInvolved: return "not-involved";
    case LogicalPairStatus::kViolation: return "violation";
  }
  return "?";
}

LogicalPairReport logical_pair_check(const StabilizerCode& code, const PauliOperator& h, const CorrectableSet& set, double tol,
                        std::size_t dense_limit) {
  check_set(code, set);
  check_dims(code, h, "H");
  if (code.n() > dense_limit) throw std::length_error("logical_pair_check: dense limit exceeded");
  const Eigen::MatrixXcd basis = code_basis(code, dense_limit);
  const Eigen::MatrixXcd hl = apply_to_columns(h, basis);
  LogicalPairReport rep;
  rep.passed = true;
  for (const auto& d : pair_products(set)) {
    LogicalPairEntry e{d, anticommutes(h, d), syndrome(code, d).is_zero(), false, 0.0, LogicalPairStatus::kProportional};
    e.stabilizer = e.zero_syndrome && in_stabilizer_group(code, d);
    e.residual = proportional_fit(hl.adjoint() * apply_to_columns(d, basis)).second;
    if (d.is_identity_up_to_phase()) {
      e.status = LogicalPairStatus::kExcludedIdentity;
    } else if (!e.anticommutes_with_h) {
      e.status = e.residual <= tol ? LogicalPairStatus::kProportional : LogicalPairStatus::kNotInvolved;
    } else if (e.residual > tol) {
      e.status = LogicalPairStatus::kViolation;
      rep.passed = false;
    }
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

// ---------------------------------------------------------------------------

SearchResult search_x(const StabilizerCode& code, const PauliOperator& h, const CorrectableSet& set,
                      const SearchOptions& options) {
  check_set(code, set);
  check_dims(code, h, "H");
  const ConditionContext ctx(code, set);
  SearchResult result;
  std::vector<PauliOperator> candidates;
  for (std::size_t w = std::max<std::size_t>(code.d(), 1); w <= code.n() && !result.truncated; ++w) {
    for_each_pauli_of_weight(code.n(), w, [&](const PauliOperator& p) {
      if (candidates.size() >= options.candidate_cap) {
        result.truncated = true;
        return false;
      }
      candidates.push_back(p);
      return true;
    });
  }
  result.candidates_examined = candidates.size();

  std::vector<char> ok(candidates.size(), 0);
  const unsigned threads = resolve_threads(options.threads, candidates.size());
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned t) {
    try {
      const std::size_t chunk = (candidates.size() + threads - 1) / threads;
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(candidates.size(), lo + chunk);
      for (std::size_t i = lo; i < hi; ++i) {
        ok[i] = valid_path_pair(code, h, candidates[i]) && ctx.check(h, candidates[i]).passed;
      }
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!ok[i]) continue;
    result.valid.push_back(candidates[i]);
    if (options.max_results && result.valid.size() >= options.max_results) break;
  }
  return result;
}

AncillaRequirement ancilla_requirement(const StabilizerCode& code, const CorrectableSet& set) {
  check_set(code, set);
  AncillaRequirement r;
  r.d_e = distinct_syndromes(code, set.errors);
  r.d_e2 = distinct_syndromes(code, pair_products(set));
  r.num_syndromes = std::size_t{1} << code.num_generators();
  if (r.d_e2 < r.num_syndromes) {
    r.s = 0;
  } else if (r.d_e < r.num_syndromes) {
    r.s = 1;
  } else {
    r.s = 2;
  }
  return r;
}

AugmentedCode augment_code(const StabilizerCode& code, int s, const PauliOperator& h, const PauliOperator& x) {
  if (s != 1 && s != 2) throw std::invalid_argument("ancilla count must be 1 or 2");
  check_dims(code, h, "H");
  check_dims(code, x, "X");
  const auto extra = static_cast<std::size_t>(s);
  const std::size_t n = code.n() + extra;
  const PauliOperator pad(extra);
  std::vector<PauliOperator> gens;
  for (const auto& g : code.generators()) gens.push_back(g.tensor(pad));
  for (std::size_t a = 0; a < extra; ++a) gens.push_back(PauliOperator::single(n, code.n() + a, 'Z'));
  std::vector<PauliOperator> lx, lz;
  for (const auto& l : code.logical_x()) lx.push_back(l.tensor(pad));
  for (const auto& l : code.logical_z()) lz.push_back(l.tensor(pad));
  StabilizerCode aug(code.name() + "+" + std::to_string(s) + "a", n, code.k(), code.d(), std::move(gens),
                     std::move(lx), std::move(lz));
  PauliOperator xa = x;
  for (std::size_t a = 0; a < extra; ++a) xa = xa.tensor(PauliOperator::single(1, 0, 'X'));
  return {std::move(aug), h.tensor(pad), std::move(xa), CorrectableSet::up_to_weight(n, 1)};
}

}  // namespace mbhqc
