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

#include "mbhqc/codes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mbhqc {
namespace {

using cplx = std::complex<double>;

void check_dense(std::size_t n, std::size_t limit) {
  if (n > limit) {
    throw std::length_error("code on " + std::to_string(n) + " qubits exceeds dense limit of " +
                            std::to_string(limit));
  }
}

std::vector<PauliOperator> parse_list(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw std::invalid_argument(std::string("code definition: missing array field '") + key + "'");
  }
  std::vector<PauliOperator> out;
  for (const auto& s : j.at(key)) out.push_back(PauliOperator::parse(s.get<std::string>()));
  return out;
}

// (I + p)/2 applied in place; scratch must have the same dimension.
void apply_half_plus(const PauliOperator& p, std::vector<cplx>& v, std::vector<cplx>& scratch) {
  std::fill(scratch.begin(), scratch.end(), cplx{});
  apply_pauli_add(p, 1.0, v.data(), scratch.data());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * (v[i] + scratch[i]);
}

}  // namespace

std::string Syndrome::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < size_; ++i) s.push_back((*this)[i] ? '1' : '0');
  return s;
}

std::size_t symplectic_rank(const std::vector<PauliOperator>& ops) {
  if (ops.empty()) return 0;
  const std::size_t n = ops.front().num_qubits();
  // Rows of 2n bits, (x | z), eliminated over GF(2).
  std::vector<std::vector<bool>> rows;
  for (const auto& p : ops) {
    std::vector<bool> r(2 * n);
    for (std::size_t q = 0; q < n; ++q) {
      r[q] = p.x(q);
      r[n + q] = p.z(q);
    }
    rows.push_back(std::move(r));
  }
  std::size_t rank = 0;
  for (std::size_t col = 0; col < 2 * n && rank < rows.size(); ++col) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && !rows[pivot][col]) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[rank], rows[pivot]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r != rank && rows[r][col]) {
        for (std::size_t c = 0; c < 2 * n; ++c) rows[r][c] = rows[r][c] ^ rows[rank][c];
      }
    }
    ++rank;
  }
  return rank;
}

StabilizerCode::StabilizerCode(std::string name, std::size_t n, std::size_t k, std::size_t d,
                               std::vector<PauliOperator> generators, std::vector<PauliOperator> logical_x,
                               std::vector<PauliOperator> logical_z)
    : name_(std::move(name)),
      n_(n),
      k_(k),
      d_(d),
      generators_(std::move(generators)),
      logical_x_(std::move(logical_x)),
      logical_z_(std::move(logical_z)) {
  if (n_ == 0 || k_ > n_) throw std::invalid_argument("code: need n >= 1 and k <= n");
  if (generators_.size() != n_ - k_) {
    throw std::invalid_argument("code '" + name_ + "': expected " + std::to_string(n_ - k_) +
                                " generators, got " + std::to_string(generators_.size()));
  }
  if (n_ - k_ > 64) throw std::invalid_argument("code: more than 64 generators is unsupported");
  if (logical_x_.size() != k_ || logical_z_.size() != k_) {
    throw std::invalid_argument("code '" + name_ + "': expected " + std::to_string(k_) +
                                " logical X and Z operators");
  }
  auto check_op = [&](const PauliOperator& p, const char* what) {
    if (p.num_qubits() != n_) throw std::invalid_argument(std::string("code: ") + what + " has wrong qubit count");
    if (!p.is_hermitian()) throw std::invalid_argument(std::string("code: ") + what + " is not Hermitian");
  };
  for (const auto& g : generators_) check_op(g, "generator");
  for (const auto& l : logical_x_) check_op(l, "logical X");
  for (const auto& l : logical_z_) check_op(l, "logical Z");
  for (std::size_t i = 0; i < generators_.size(); ++i)
    for (std::size_t j = i + 1; j < generators_.size(); ++j)
      if (!commutes(generators_[i], generators_[j]))
        throw std::invalid_argument("code '" + name_ + "': generators " + std::to_string(i) + " and " +
                                    std::to_string(j) + " anticommute");
  if (symplectic_rank(generators_) != generators_.size())
    throw std::invalid_argument("code '" + name_ + "': generators are not independent");
  for (std::size_t i = 0; i < k_; ++i) {
    for (const auto& g : generators_) {
      if (!commutes(g, logical_x_[i]) || !commutes(g, logical_z_[i]))
        throw std::invalid_argument("code '" + name_ + "': logical operator anticommutes with a generator");
    }
    for (std::size_t j = 0; j < k_; ++j) {
      const bool xz_should_anti = (i == j);
      if (commutes(logical_x_[i], logical_z_[j]) == xz_should_anti)
        throw std::invalid_argument("code '" + name_ + "': logical X/Z commutation relations violated");
      if (i != j && (!commutes(logical_x_[i], logical_x_[j]) || !commutes(logical_z_[i], logical_z_[j])))
        throw std::invalid_argument("code '" + name_ + "': distinct logical qubits do not commute");
    }
  }
}

StabilizerCode StabilizerCode::with_generators(std::vector<PauliOperator> generators) const {
  for (const auto& g : generators) {
    if (g.num_qubits() != n_ || !in_stabilizer_group(*this, g))
      throw std::invalid_argument("with_generators: operator " + g.to_string() + " is not in the stabilizer group");
  }
  return StabilizerCode(name_, n_, k_, d_, std::move(generators), logical_x_, logical_z_);
}

StabilizerCode StabilizerCode::from_json_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("code definition: ") + e.what());
  }
  for (const char* key : {"n", "k", "d"}) {
    if (!j.contains(key) || !j.at(key).is_number_unsigned())
      throw std::invalid_argument(std::string("code definition: missing non-negative integer field '") + key + "'");
  }
  return StabilizerCode(j.value("name", std::string("custom")), j.at("n").get<std::size_t>(),
                        j.at("k").get<std::size_t>(), j.at("d").get<std::size_t>(), parse_list(j, "generators"),
                        parse_list(j, "logical_x"), parse_list(j, "logical_z"));
}

StabilizerCode StabilizerCode::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open code definition file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string StabilizerCode::to_json_text() const {
  nlohmann::json j;
  j["name"] = name_;
  j["n"] = n_;
  j["k"] = k_;
  j["d"] = d_;
  auto strings = [](const std::vector<PauliOperator>& v) {
    std::vector<std::string> s;
    for (const auto& p : v) s.push_back(p.to_string());
    return s;
  };
  j["generators"] = strings(generators_);
  j["logical_x"] = strings(logical_x_);
  j["logical_z"] = strings(logical_z_);
  return j.dump(2);
}

Syndrome syndrome(const StabilizerCode& code, const PauliOperator& p) {
  if (p.num_qubits() != code.n()) throw std::invalid_argument("syndrome: Pauli dimension mismatch");
  Syndrome s(code.num_generators());
  for (std::size_t i = 0; i < code.num_generators(); ++i) s.set(i, anticommutes(p, code.generators()[i]));
  return s;
}

bool in_stabilizer_group(const StabilizerCode& code, const PauliOperator& p) {
  if (!syndrome(code, p).is_zero()) return false;
  auto ops = code.generators();
  const std::size_t r = symplectic_rank(ops);
  ops.push_back(p);
  return symplectic_rank(ops) == r;
}

std::vector<PauliOperator> stabilizer_group(const StabilizerCode& code) {
  const std::size_t m = code.num_generators();
  std::vector<PauliOperator> out;
  out.reserve(std::size_t{1} << m);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    PauliOperator p(code.n());
    for (std::size_t i = 0; i < m; ++i)
      if ((mask >> i) & 1U) p = p * code.generators()[i];
    out.push_back(p);
  }
  return out;
}

Eigen::MatrixXcd code_projector(const StabilizerCode& code, std::size_t dense_limit) {
  check_dense(code.n(), dense_limit);
  const std::size_t dim = std::size_t{1} << code.n();
  Eigen::MatrixXcd proj(dim, dim);
  std::vector<cplx> v(dim), scratch(dim);
  for (std::size_t col = 0; col < dim; ++col) {
    std::fill(v.begin(), v.end(), cplx{});
    v[col] = 1.0;
    for (const auto& g : code.generators()) apply_half_plus(g, v, scratch);
    for (std::size_t row = 0; row < dim; ++row) proj(row, col) = v[row];
  }
  return proj;
}

Eigen::MatrixXcd code_basis(const StabilizerCode& code, std::size_t dense_limit) {
  check_dense(code.n(), dense_limit);
  const std::size_t dim = std::size_t{1} << code.n();
  const std::size_t kdim = std::size_t{1} << code.k();

  // A fixed generic vector has nonzero overlap with |0bar> for any code we build.
  std::mt19937_64 gen(0x5eed5eedULL);
  std::normal_distribution<double> normal;
  std::vector<cplx> v(dim), scratch(dim);
  for (auto& a : v) {
    const double re = normal(gen);
    const double im = normal(gen);
    a = {re, im};
  }
  for (const auto& g : code.generators()) apply_half_plus(g, v, scratch);
  for (const auto& z : code.logical_z()) apply_half_plus(z, v, scratch);

  double norm2 = 0;
  for (const auto& a : v) norm2 += std::norm(a);
  if (norm2 < 1e-20) throw std::runtime_error("code_basis: failed to construct |0bar>");
  const double inv = 1.0 / std::sqrt(norm2);
  std::size_t best = 0;
  double best_mag = -1;
  for (std::size_t i = 0; i < dim; ++i) {
    const double mag = std::abs(v[i]) * inv;
    if (mag > best_mag + 1e-9) {
      best_mag = mag;
      best = i;
    }
  }
  const cplx phase = std::conj(v[best]) / std::abs(v[best]);
  for (auto& a : v) a *= phase * inv;

  Eigen::MatrixXcd basis(dim, kdim);
  for (std::size_t j = 0; j < kdim; ++j) {
    std::vector<cplx> col = v;
    for (std::size_t i = 0; i < code.k(); ++i) {
      if ((j >> (code.k() - 1 - i)) & 1U) {
        std::fill(scratch.begin(), scratch.end(), cplx{});
        apply_pauli_add(code.logical_x()[i], 1.0, col.data(), scratch.data());
        col.swap(scratch);
      }
    }
    for (std::size_t row = 0; row < dim; ++row) basis(row, j) = col[row];
  }
  return basis;
}

StabilizerCode builtin_code(std::string_view name) {
  auto P = [](const char* s) { return PauliOperator::parse(s); };
  if (name == "bitflip3") {
    return StabilizerCode("bitflip3", 3, 1, 3, {P("ZZI"), P("IZZ")}, {P("XXX")}, {P("ZZZ")});
  }
  if (name == "shor9") {
    return StabilizerCode("shor9", 9, 1, 3,
                          {P("ZZIIIIIII"), P("IZZIIIIII"), P("IIIZZIIII"), P("IIIIZZIII"), P("IIIIIIZZI"),
                           P("IIIIIIIZZ"), P("XXXXXXIII"), P("IIIXXXXXX")},
                          {P("ZZZZZZZZZ")}, {P("XXXXXXXXX")});
  }
  if (name == "steane7") {
    return StabilizerCode("steane7", 7, 1, 3,
                          {P("IIIXXXX"), P("IXXIIXX"), P("XIXIXIX"), P("IIIZZZZ"), P("IZZIIZZ"), P("ZIZIZIZ")},
                          {P("XXXXXXX")}, {P("ZZZZZZZ")});
  }
  if (name == "perfect5") {
    return StabilizerCode("perfect5", 5, 1, 3, {P("XZZXI"), P("IXZZX"), P("XIXZZ"), P("ZXIXZ")}, {P("XXXXX")},
                          {P("ZZZZZ")});
  }
  throw std::invalid_argument("unknown builtin code '" + std::string(name) + "'");
}

std::vector<std::string> builtin_code_names() { return {"bitflip3", "shor9", "steane7", "perfect5"}; }

std::vector<PauliOperator> transform_generators(const StabilizerCode& code, const PauliOperator& x) {
  std::vector<PauliOperator> anti, comm;
  for (const auto& g : code.generators()) (anticommutes(g, x) ? anti : comm).push_back(g);
  if (anti.empty()) throw std::invalid_argument("transform_generators: no generator anticommutes with " + x.to_string());
  std::vector<PauliOperator> out{anti.front()};
  for (std::size_t i = 1; i < anti.size(); ++i) out.push_back(anti.front() * anti[i]);
  out.insert(out.end(), comm.begin(), comm.end());
  return out;
}

}  // namespace mbhqc
