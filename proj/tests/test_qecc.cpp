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
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "mbhqc/codes.hpp"
#include "mbhqc/qecc.hpp"
#include "oracle.hpp"

namespace {

using mbhqc::CorrectableSet;
using mbhqc::PauliOperator;
using oracle::Mat;

std::vector<std::string> gen_strings(const mbhqc::StabilizerCode& code) {
  std::vector<std::string> out;
  for (const auto& g : code.generators()) out.push_back(g.to_string());
  return out;
}

Mat code_basis_oracle(const mbhqc::StabilizerCode& code) { return oracle::range_basis(oracle::projector(gen_strings(code))); }

/// Syndrome from letters alone: odd number of positions where both are non-identity and differ.
std::string syndrome_oracle(const std::string& a, const std::vector<std::string>& gens) {
  auto strip = [](const std::string& s) {
    std::size_t p = 0;
    while (p < s.size() && (s[p] == '+' || s[p] == '-' || s[p] == 'i')) ++p;
    return s.substr(p);
  };
  const std::string pa = strip(a);
  std::string out;
  for (const auto& g : gens) {
    const std::string pg = strip(g);
    int parity = 0;
    for (std::size_t q = 0; q < pa.size(); ++q) {
      if (pa[q] != 'I' && pg[q] != 'I' && pa[q] != pg[q]) parity ^= 1;
    }
    out.push_back(parity ? '1' : '0');
  }
  return out;
}

/// max over pairs of || L^dag Eb^dag Ea L - gamma I ||_F.
double kl_residual_oracle(const Mat& l, const std::vector<Mat>& errors) {
  std::vector<Mat> el;
  for (const auto& e : errors) el.push_back(e * l);
  double worst = 0.0;
  for (const auto& b : el) {
    for (const auto& a : el) {
      const Mat m = b.adjoint() * a;
      const auto g = m.trace() / static_cast<double>(m.rows());
      worst = std::max(worst, (m - g * Mat::Identity(m.rows(), m.cols())).norm());
    }
  }
  return worst;
}

std::vector<Mat> dense_errors(const CorrectableSet& set) {
  std::vector<Mat> out;
  for (const auto& e : set.errors) out.push_back(oracle::pauli(e.to_string()));
  return out;
}

PauliOperator sparse_x(std::size_t n, std::initializer_list<std::size_t> qubits) {
  PauliOperator p(n);
  for (auto q : qubits) p = p * PauliOperator::single(n, q, 'X');
  return p;
}

// ---------------------------------------------------------------------------

TEST(CorrectableSet, WeightOneHasThreeNPlusOne) {
  const auto s = CorrectableSet::up_to_weight(5, 1);
  EXPECT_EQ(s.errors.size(), 16U);
  EXPECT_TRUE(s.errors.front().is_identity_up_to_phase());
  EXPECT_EQ(CorrectableSet::for_code(mbhqc::builtin_code("steane7")).errors.size(), 22U);
  EXPECT_EQ(CorrectableSet::up_to_weight(3, 2).errors.size(), 1U + 9U + 27U);
}

TEST(CorrectableSet, SyndromeCountsMatchHashSetOracle) {
  for (const auto& name : mbhqc::builtin_code_names()) {
    const auto code = mbhqc::builtin_code(name);
    const auto set = CorrectableSet::for_code(code);
    const auto gens = gen_strings(code);
    std::set<std::string> se, se2;
    std::set<std::string> pairs;
    for (const auto& a : set.errors) {
      se.insert(syndrome_oracle(a.to_string(), gens));
      for (const auto& b : set.errors) {
        const std::string p = (a * b).with_phase(0).to_string();
        pairs.insert(p);
        se2.insert(syndrome_oracle(p, gens));
      }
    }
    EXPECT_EQ(mbhqc::distinct_syndromes(code, set.errors), se.size()) << name;
    const auto e2 = mbhqc::pair_products(set);
    EXPECT_EQ(e2.size(), pairs.size()) << name;
    EXPECT_EQ(mbhqc::distinct_syndromes(code, e2), se2.size()) << name;
    const auto req = mbhqc::ancilla_requirement(code, set);
    EXPECT_EQ(req.d_e, se.size());
    EXPECT_EQ(req.d_e2, se2.size());
  }
}

// ---------------------------------------------------------------------------

TEST(Kl, BitflipCorrectsSingleFlips) {
  const auto code = mbhqc::builtin_code("bitflip3");
  CorrectableSet set;
  set.errors = {PauliOperator::parse("III"), PauliOperator::parse("XII"), PauliOperator::parse("IXI"),
                PauliOperator::parse("IIX")};
  const auto r = mbhqc::kl_check(code, set);
  EXPECT_TRUE(r.passed);
  EXPECT_FALSE(r.violation.has_value());
  EXPECT_LT((r.gamma - Mat::Identity(4, 4)).norm(), 1e-12);
  EXPECT_LT(kl_residual_oracle(code_basis_oracle(code), dense_errors(set)), 1e-12);
}

TEST(Kl, BitflipCannotCorrectPhaseFlip) {
  const auto code = mbhqc::builtin_code("bitflip3");
  CorrectableSet set;
  set.errors = {PauliOperator::parse("III"), PauliOperator::parse("ZII")};
  const auto r = mbhqc::kl_check(code, set);
  EXPECT_FALSE(r.passed);
  ASSERT_TRUE(r.violation.has_value());
  EXPECT_NE(r.violation->first, r.violation->second);
  EXPECT_GT(kl_residual_oracle(code_basis_oracle(code), dense_errors(set)), 1.0);
}

TEST(Kl, BuiltinCodesCorrectWeightOne) {
  for (const auto& name : mbhqc::builtin_code_names()) {
    const auto code = mbhqc::builtin_code(name);
    const auto set = CorrectableSet::for_code(code);
    const auto r = mbhqc::kl_check(code, set);
    if (name == "bitflip3") {
      EXPECT_FALSE(r.passed);  // phase flips are in the generated set
      continue;
    }
    EXPECT_TRUE(r.passed) << name << " residual " << r.max_residual;
    EXPECT_LT((r.gamma - r.gamma.adjoint()).norm(), 1e-12);
  }
}

TEST(Kl, DenseLimit) {
  const auto code = mbhqc::builtin_code("shor9");
  EXPECT_THROW(mbhqc::kl_check(code, CorrectableSet::for_code(code), 1e-10, 8), std::length_error);
}

// ---------------------------------------------------------------------------

TEST(Conjugation, CasesFollowCommutation) {
  const auto h = PauliOperator::parse("ZZZ");
  const auto x = PauliOperator::parse("XII");
  EXPECT_EQ(mbhqc::classify_conjugation(PauliOperator::parse("IZI"), h, x).case_number, 1);
  EXPECT_EQ(mbhqc::classify_conjugation(PauliOperator::parse("IZI"), h, x).operators.size(), 1U);
  EXPECT_EQ(mbhqc::classify_conjugation(PauliOperator::parse("ZII"), h, x).case_number, 2);
  EXPECT_EQ(mbhqc::classify_conjugation(PauliOperator::parse("IXI"), h, x).case_number, 3);
  const auto c4 = mbhqc::classify_conjugation(PauliOperator::parse("YII"), h, x);
  EXPECT_EQ(c4.case_number, 4);
  ASSERT_EQ(c4.operators.size(), 3U);
  EXPECT_TRUE(c4.operators[1].equal_up_to_phase(h * PauliOperator::parse("YII")));
  EXPECT_TRUE(c4.operators[2].equal_up_to_phase(x * PauliOperator::parse("YII")));

  const auto self = mbhqc::classify_conjugation(x, h, x);
  EXPECT_EQ(self.case_number, 3);
  ASSERT_EQ(self.operators.size(), 3U);
  EXPECT_TRUE(self.operators[1].equal_up_to_phase(h * x));
  EXPECT_TRUE(self.operators[2].equal_up_to_phase(h * x * x));
}

// V^dag D V must lie in the span of the listed operators.
TEST(Conjugation, DenseExpansionLiesInSpan) {
  std::mt19937_64 rng(11);
  const char letters[] = {'I', 'X', 'Y', 'Z'};
  auto random_pauli = [&](std::size_t n) {
    std::string s;
    for (std::size_t q = 0; q < n; ++q) s.push_back(letters[rng() % 4]);
    return s;
  };
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  int checked[5] = {0, 0, 0, 0, 0};
  for (int trial = 0; trial < 400; ++trial) {
    const std::string hs = random_pauli(3), xs = random_pauli(3), ds = random_pauli(3);
    const auto h = PauliOperator::parse(hs), x = PauliOperator::parse(xs), d = PauliOperator::parse(ds);
    if (mbhqc::commutes(h, x)) continue;
    const auto entry = mbhqc::classify_conjugation(d, h, x);
    const Mat v = oracle::path_v(oracle::pauli(hs), oracle::pauli(xs), u(rng), u(rng));
    const Mat target = v.adjoint() * oracle::pauli(ds) * v;
    Eigen::MatrixXcd a(64, static_cast<Eigen::Index>(entry.operators.size()));
    for (std::size_t j = 0; j < entry.operators.size(); ++j) {
      const Mat op = oracle::pauli(entry.operators[j].to_string());
      a.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXcd>(op.data(), 64);
    }
    const Eigen::VectorXcd t = Eigen::Map<const Eigen::VectorXcd>(target.data(), 64);
    const Eigen::VectorXcd coef = a.colPivHouseholderQr().solve(t);
    EXPECT_LT((a * coef - t).norm(), 1e-10) << hs << " " << xs << " " << ds;
    ++checked[entry.case_number];
  }
  for (int c = 1; c <= 4; ++c) EXPECT_GT(checked[c], 5) << "case " << c;
}

// ---------------------------------------------------------------------------

TEST(SufficientConditions, ShorTransversalPasses) {
  const auto code = mbhqc::builtin_code("shor9");
  const auto h = PauliOperator::sparse(9, {{0, 'Z'}, {3, 'Z'}, {6, 'Z'}});
  const auto x = sparse_x(9, {0, 3, 6});
  const auto r = mbhqc::sufficient_conditions_check(code, h, x, CorrectableSet::for_code(code));
  EXPECT_TRUE(r.passed);
  EXPECT_TRUE(r.weight_ok);
  EXPECT_TRUE(r.violations.empty());
}

TEST(SufficientConditions, ShortXFailsWeightClause) {
  const auto code = mbhqc::builtin_code("shor9");
  const auto h = PauliOperator::sparse(9, {{0, 'Z'}, {3, 'Z'}, {6, 'Z'}});
  const auto r = mbhqc::sufficient_conditions_check(code, h, sparse_x(9, {0, 3}), CorrectableSet::for_code(code));
  EXPECT_FALSE(r.passed);
  EXPECT_FALSE(r.weight_ok);
}

TEST(SufficientConditions, SteaneAndPerfectFailWithoutAncillas) {
  const auto steane = mbhqc::builtin_code("steane7");
  const auto r7 = mbhqc::sufficient_conditions_check(steane, PauliOperator::parse("ZZZZZZZ"), PauliOperator::parse("XZIIIII"),
                                        CorrectableSet::for_code(steane));
  EXPECT_FALSE(r7.passed);
  EXPECT_FALSE(r7.violations.empty());
  const auto five = mbhqc::builtin_code("perfect5");
  const auto r5 = mbhqc::sufficient_conditions_check(five, PauliOperator::parse("ZZZZZ"), PauliOperator::parse("XIIII"),
                                        CorrectableSet::for_code(five));
  EXPECT_FALSE(r5.passed);
  EXPECT_FALSE(r5.violations.empty());
  for (const auto& v : r5.violations) EXPECT_GE(v.case_number, 1);
}

// passed must agree with "no violations and weight clause holds".
TEST(SufficientConditions, PassedIffNoViolations) {
  const auto code = mbhqc::builtin_code("steane7");
  const auto set = CorrectableSet::for_code(code);
  const auto h = PauliOperator::parse("ZZZZZZZ");
  int n = 0;
  mbhqc::for_each_pauli_of_weight(7, 3, [&](const PauliOperator& x) {
    const auto r = mbhqc::sufficient_conditions_check(code, h, x, set);
    EXPECT_EQ(r.passed, r.weight_ok && r.violations.empty());
    EXPECT_EQ(r.stabilizer_ok && r.logical_ok, std::none_of(r.violations.begin(), r.violations.end(), [](auto& v) {
                return v.clause != mbhqc::Clause::kWeight;
              }));
    return ++n < 300;
  });
}

TEST(SufficientConditions, ClauseRadiusParity) {
  EXPECT_EQ(mbhqc::clause_radius(3), 2U);
  EXPECT_EQ(mbhqc::clause_radius(4), 2U);
  EXPECT_EQ(mbhqc::clause_radius(5), 4U);
  EXPECT_EQ(mbhqc::clause_radius(6), 4U);
  EXPECT_EQ(mbhqc::clause_radius(1), 0U);
}

// Sufficiency end to end: a passing pair keeps the rotated codes correcting.
TEST(SufficientConditions, PassingPairSatisfiesRotatedKlDensely) {
  const auto code = mbhqc::builtin_code("shor9");
  const auto h = PauliOperator::sparse(9, {{0, 'Z'}, {3, 'Z'}, {6, 'Z'}});
  const auto x = sparse_x(9, {0, 3, 6});
  const auto set = CorrectableSet::for_code(code);
  ASSERT_TRUE(mbhqc::sufficient_conditions_check(code, h, x, set).passed);
  const Mat l = code_basis_oracle(code);
  const Mat hm = oracle::pauli(h.to_string()), xm = oracle::pauli(x.to_string());
  const auto errs = dense_errors(set);
  std::vector<double> phis;
  for (int j = 0; j <= 7; ++j) phis.push_back(2.0 * std::numbers::pi * j / 7.0);
  for (double theta : {std::numbers::pi / 2, std::numbers::pi}) {
    for (double phi : phis) {
      EXPECT_LT(kl_residual_oracle(oracle::path_v_times(hm, xm, theta, phi, l), errs), 1e-9) << phi;
    }
    const auto r = mbhqc::rotated_kl_check(code, h, x, theta, set, phis);
    EXPECT_TRUE(r.passed) << r.max_residual;
    EXPECT_EQ(r.residual_per_phi.size(), phis.size());
  }
}

// ---------------------------------------------------------------------------

TEST(LogicalPairs, StatusesOnShor) {
  const auto code = mbhqc::builtin_code("shor9");
  const auto h = PauliOperator::sparse(9, {{0, 'Z'}, {3, 'Z'}, {6, 'Z'}});
  const auto rep = mbhqc::logical_pair_check(code, h, CorrectableSet::for_code(code));
  EXPECT_TRUE(rep.passed);
  bool saw_identity = false, saw_degenerate = false;
  for (const auto& e : rep.entries) {
    if (e.d.is_identity_up_to_phase()) {
      saw_identity = true;
      EXPECT_EQ(e.status, mbhqc::LogicalPairStatus::kExcludedIdentity);
      EXPECT_GT(e.residual, 0.5);  // P0 H P0 = H P0 is a logical, not a scalar
    } else if (e.d.to_string() == "ZZIIIIIII") {
      saw_degenerate = true;
      EXPECT_TRUE(e.stabilizer);
      EXPECT_EQ(e.status, mbhqc::LogicalPairStatus::kNotInvolved);
    } else if (!e.zero_syndrome) {
      EXPECT_LT(e.residual, 1e-10) << e.d.to_string();
    }
    if (e.anticommutes_with_h) EXPECT_EQ(e.status, mbhqc::LogicalPairStatus::kProportional) << e.d.to_string();
  }
  EXPECT_TRUE(saw_identity);
  EXPECT_TRUE(saw_degenerate);
}

TEST(LogicalPairs, PerfectCodeEveryNonTrivialPairVanishes) {
  const auto code = mbhqc::builtin_code("perfect5");
  const auto rep = mbhqc::logical_pair_check(code, PauliOperator::parse("ZZZZZ"), CorrectableSet::for_code(code));
  EXPECT_TRUE(rep.passed);
  for (const auto& e : rep.entries) {
    if (e.d.is_identity_up_to_phase()) continue;
    EXPECT_FALSE(e.zero_syndrome);
    EXPECT_LT(e.residual, 1e-10);
  }
}

// Nonzero syndrome sandwiches to zero; stabilizers give +-P0; logicals are not scalar.
TEST(CodeSpaceSandwich, SandwichOnBuiltinCodes) {
  std::mt19937_64 rng(5);
  const char letters[] = {'I', 'X', 'Y', 'Z'};
  for (const auto& name : mbhqc::builtin_code_names()) {
    const auto code = mbhqc::builtin_code(name);
    const Mat l = code_basis_oracle(code);
    const auto gens = gen_strings(code);
    const Mat id = Mat::Identity(l.cols(), l.cols());
    for (int trial = 0; trial < 60; ++trial) {
      std::string s;
      for (std::size_t q = 0; q < code.n(); ++q) s.push_back(letters[rng() % 4]);
      const Mat m = l.adjoint() * oracle::pauli(s) * l;
      if (syndrome_oracle(s, gens).find('1') != std::string::npos) {
        EXPECT_LT(m.norm(), 1e-12) << name << " " << s;
      }
    }
    for (const auto& g : mbhqc::stabilizer_group(code)) {
      const Mat m = l.adjoint() * oracle::pauli(g.to_string()) * l;
      EXPECT_TRUE((m - id).norm() < 1e-10 || (m + id).norm() < 1e-10) << name << " " << g.to_string();
    }
    for (const auto& lg : code.logical_x()) {
      const Mat m = l.adjoint() * oracle::pauli(lg.to_string()) * l;
      const auto g = m.trace() / static_cast<double>(m.rows());
      EXPECT_GT((m - g * id).norm(), 0.5) << name;
    }
    for (const auto& lg : code.logical_z()) {
      const Mat m = l.adjoint() * oracle::pauli(lg.to_string()) * l;
      const auto g = m.trace() / static_cast<double>(m.rows());
      EXPECT_GT((m - g * id).norm(), 0.5) << name;
    }
  }
}

// ---------------------------------------------------------------------------

TEST(Search, ShorFindsTransversalX) {
  const auto code = mbhqc::builtin_code("shor9");
  const auto h = PauliOperator::sparse(9, {{0, 'Z'}, {3, 'Z'}, {6, 'Z'}});
  const auto set = CorrectableSet::for_code(code);
  const auto r = mbhqc::search_x(code, h, set);
  EXPECT_FALSE(r.truncated);
  const auto target = sparse_x(9, {0, 3, 6});
  EXPECT_TRUE(std::any_of(r.valid.begin(), r.valid.end(), [&](auto& p) { return p.equal_up_to_phase(target); }));
  std::size_t last_weight = 0;
  for (const auto& p : r.valid) {
    EXPECT_GE(mbhqc::weight(p), last_weight);
    last_weight = mbhqc::weight(p);
    EXPECT_TRUE(p.is_hermitian());
    EXPECT_FALSE(mbhqc::commutes(p, h));
  }
  for (std::size_t i = 0; i < std::min<std::size_t>(r.valid.size(), 25); ++i) {
    EXPECT_TRUE(mbhqc::sufficient_conditions_check(code, h, r.valid[i], set).passed);
  }
}

TEST(Search, SteaneAndPerfectHaveNoValidX) {
  const auto steane = mbhqc::builtin_code("steane7");
  const auto r7 = mbhqc::search_x(steane, PauliOperator::parse("ZZZZZZZ"), CorrectableSet::for_code(steane));
  EXPECT_TRUE(r7.valid.empty());
  EXPECT_FALSE(r7.truncated);
  EXPECT_GT(r7.candidates_examined, 0U);
  const auto five = mbhqc::builtin_code("perfect5");
  const auto r5 = mbhqc::search_x(five, PauliOperator::parse("ZZZZZ"), CorrectableSet::for_code(five));
  EXPECT_TRUE(r5.valid.empty());
}

TEST(Search, CapTruncatesAndThreadsAgree) {
  const auto code = mbhqc::builtin_code("shor9");
  const auto h = PauliOperator::sparse(9, {{0, 'Z'}, {3, 'Z'}, {6, 'Z'}});
  const auto set = CorrectableSet::for_code(code);
  mbhqc::SearchOptions o;
  o.candidate_cap = 5000;
  o.threads = 1;
  const auto a = mbhqc::search_x(code, h, set, o);
  o.threads = 5;
  const auto b = mbhqc::search_x(code, h, set, o);
  EXPECT_TRUE(a.truncated);
  EXPECT_EQ(a.candidates_examined, 5000U);
  ASSERT_EQ(a.valid.size(), b.valid.size());
  for (std::size_t i = 0; i < a.valid.size(); ++i) EXPECT_EQ(a.valid[i], b.valid[i]);
  o.max_results = 3;
  EXPECT_LE(mbhqc::search_x(code, h, set, o).valid.size(), 3U);
}

// ---------------------------------------------------------------------------

TEST(Ancilla, RequirementForBuiltinCodes) {
  const auto s = [](const char* name) {
    const auto code = mbhqc::builtin_code(name);
    return mbhqc::ancilla_requirement(code, CorrectableSet::for_code(code));
  };
  EXPECT_EQ(s("shor9").s, 0);
  EXPECT_EQ(s("steane7").s, 1);
  EXPECT_EQ(s("perfect5").s, 2);
  EXPECT_EQ(s("steane7").num_syndromes, 64U);
  EXPECT_EQ(s("perfect5").d_e, 16U);
}

TEST(Ancilla, AugmentedShape) {
  const auto steane = mbhqc::builtin_code("steane7");
  const auto aug = mbhqc::augment_code(steane, 1, PauliOperator::parse("ZZZZZZZ"), PauliOperator::parse("XZIIIII"));
  EXPECT_EQ(aug.code.n(), 8U);
  EXPECT_EQ(aug.code.num_generators(), 7U);
  EXPECT_EQ(aug.h.to_string(), "ZZZZZZZI");
  EXPECT_EQ(aug.x.to_string(), "XZIIIIIX");
  EXPECT_EQ(aug.code.generators().back().to_string(), "IIIIIIIZ");
  EXPECT_EQ(aug.errors.errors.size(), 25U);
  EXPECT_THROW(mbhqc::augment_code(steane, 3, aug.h, aug.x), std::invalid_argument);
}

void expect_augmented_passes(const char* name, int s, const std::string& h, const std::string& x) {
  const auto code = mbhqc::builtin_code(name);
  const auto aug = mbhqc::augment_code(code, s, PauliOperator::parse(h), PauliOperator::parse(x));
  std::vector<double> phis;
  for (int j = 0; j <= 7; ++j) phis.push_back(2.0 * std::numbers::pi * j / 7.0);
  const Mat l = code_basis_oracle(aug.code);
  const Mat hm = oracle::pauli(aug.h.to_string()), xm = oracle::pauli(aug.x.to_string());
  const auto errs = dense_errors(aug.errors);
  for (double theta : {std::numbers::pi / 2, std::numbers::pi}) {
    const auto r = mbhqc::rotated_kl_check(aug.code, aug.h, aug.x, theta, aug.errors, phis);
    EXPECT_TRUE(r.passed) << name << " residual " << r.max_residual;
    EXPECT_LT(r.max_residual, 1e-9);
    for (double phi : {phis[1], phis[4]}) {
      EXPECT_LT(kl_residual_oracle(oracle::path_v_times(hm, xm, theta, phi, l), errs), 1e-9) << name << " " << phi;
    }
  }
  // The unaugmented code fails at an intermediate angle.
  const auto bare = mbhqc::rotated_kl_check(code, PauliOperator::parse(h), PauliOperator::parse(x), std::numbers::pi / 2,
                                            CorrectableSet::for_code(code), {std::numbers::pi / 4});
  EXPECT_FALSE(bare.passed) << name;
}

TEST(Ancilla, AugmentedSteanePassesRotatedKl) { expect_augmented_passes("steane7", 1, "ZZZZZZZ", "XZIIIII"); }

TEST(Ancilla, AugmentedPerfectPassesRotatedKl) { expect_augmented_passes("perfect5", 2, "ZZZZZ", "XIIII"); }

}  // namespace
