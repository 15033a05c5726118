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

#include "mbhqc/pauli.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace mbhqc {
namespace {

constexpr std::size_t kWordBits = 64;

std::size_t word_count(std::size_t n) { return (n + kWordBits - 1) / kWordBits; }

int mod4(int v) { return ((v % 4) + 4) % 4; }

void require_same_size(const PauliOperator& a, const PauliOperator& b) {
  if (a.num_qubits() != b.num_qubits()) {
    throw std::invalid_argument("Pauli dimension mismatch: " + std::to_string(a.num_qubits()) + " vs " +
                                std::to_string(b.num_qubits()));
  }
}

}  // namespace

std::complex<double> i_pow(int power) {
  switch (mod4(power)) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

PauliOperator::PauliOperator(std::size_t n) : n_(n), xs_(word_count(n), 0), zs_(word_count(n), 0) {}

void PauliOperator::set(std::size_t q, bool xb, bool zb) {
  const std::uint64_t bit = std::uint64_t{1} << (q % kWordBits);
  auto& xw = xs_[q / kWordBits];
  auto& zw = zs_[q / kWordBits];
  xw = xb ? (xw | bit) : (xw & ~bit);
  zw = zb ? (zw | bit) : (zw & ~bit);
}

bool PauliOperator::x(std::size_t q) const { return (xs_[q / kWordBits] >> (q % kWordBits)) & 1U; }
bool PauliOperator::z(std::size_t q) const { return (zs_[q / kWordBits] >> (q % kWordBits)) & 1U; }

char PauliOperator::kind(std::size_t q) const {
  static constexpr char kKinds[4] = {'I', 'Z', 'X', 'Y'};
  return kKinds[(x(q) ? 2 : 0) + (z(q) ? 1 : 0)];
}

PauliOperator PauliOperator::parse(std::string_view text) {
  int phase = 0;
  std::size_t pos = 0;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    if (text[pos] == '-') phase = 2;
    ++pos;
  }
  if (pos < text.size() && text[pos] == 'i') {
    phase += 1;
    ++pos;
  }
  const std::string_view body = text.substr(pos);
  if (body.empty()) throw std::invalid_argument("empty Pauli string: '" + std::string(text) + "'");
  PauliOperator p(body.size());
  for (std::size_t q = 0; q < body.size(); ++q) {
    switch (body[q]) {
      case 'I': case '_': break;
      case 'X': p.set(q, true, false); break;
      case 'Y': p.set(q, true, true); break;
      case 'Z': p.set(q, false, true); break;
      default:
        throw std::invalid_argument("bad character '" + std::string(1, body[q]) + "' in Pauli string '" +
                                    std::string(text) + "'");
    }
  }
  p.phase_ = mod4(phase);
  return p;
}

PauliOperator PauliOperator::single(std::size_t n, std::size_t qubit, char kind) {
  return sparse(n, {{qubit, kind}});
}

PauliOperator PauliOperator::sparse(std::size_t n,
                                    std::initializer_list<std::pair<std::size_t, char>> terms) {
  PauliOperator p(n);
  for (const auto& [q, kind] : terms) {
    if (q >= n) throw std::out_of_range("qubit index " + std::to_string(q) + " out of range");
    PauliOperator f(n);
    switch (kind) {
      case 'I': break;
      case 'X': f.set(q, true, false); break;
      case 'Y': f.set(q, true, true); break;
      case 'Z': f.set(q, false, true); break;
      default: throw std::invalid_argument("bad Pauli kind");
    }
    p = p * f;
  }
  return p;
}

std::size_t PauliOperator::weight() const {
  std::size_t w = 0;
  for (std::size_t i = 0; i < xs_.size(); ++i) w += std::popcount(xs_[i] | zs_[i]);
  return w;
}

std::vector<std::size_t> PauliOperator::support() const {
  std::vector<std::size_t> out;
  for (std::size_t q = 0; q < n_; ++q)
    if (x(q) || z(q)) out.push_back(q);
  return out;
}

bool PauliOperator::is_identity_up_to_phase() const {
  for (std::size_t i = 0; i < xs_.size(); ++i)
    if (xs_[i] | zs_[i]) return false;
  return true;
}

bool PauliOperator::equal_up_to_phase(const PauliOperator& other) const {
  return n_ == other.n_ && xs_ == other.xs_ && zs_ == other.zs_;
}

PauliOperator PauliOperator::with_phase(int power) const {
  PauliOperator p = *this;
  p.phase_ = mod4(power);
  return p;
}

PauliOperator PauliOperator::tensor(const PauliOperator& other) const {
  PauliOperator p(n_ + other.n_);
  for (std::size_t q = 0; q < n_; ++q) p.set(q, x(q), z(q));
  for (std::size_t q = 0; q < other.n_; ++q) p.set(n_ + q, other.x(q), other.z(q));
  p.phase_ = mod4(phase_ + other.phase_);
  return p;
}

std::uint64_t PauliOperator::x_index_mask() const {
  std::uint64_t m = 0;
  for (std::size_t q = 0; q < n_ && q < kWordBits; ++q)
    if (x(q)) m |= std::uint64_t{1} << (n_ - 1 - q);
  return m;
}

std::uint64_t PauliOperator::z_index_mask() const {
  std::uint64_t m = 0;
  for (std::size_t q = 0; q < n_ && q < kWordBits; ++q)
    if (z(q)) m |= std::uint64_t{1} << (n_ - 1 - q);
  return m;
}

std::size_t PauliOperator::y_count() const {
  std::size_t c = 0;
  for (std::size_t i = 0; i < xs_.size(); ++i) c += std::popcount(xs_[i] & zs_[i]);
  return c;
}

std::string PauliOperator::to_string() const {
  static constexpr const char* kPrefix[4] = {"", "i", "-", "-i"};
  std::string s = kPrefix[phase_];
  s.reserve(s.size() + n_);
  for (std::size_t q = 0; q < n_; ++q) s.push_back(kind(q));
  return s;
}

PauliOperator operator*(const PauliOperator& a, const PauliOperator& b) {
  require_same_size(a, b);
  PauliOperator out(a.n_);
  int phase = a.phase_ + b.phase_;
  for (std::size_t i = 0; i < a.xs_.size(); ++i) {
    const std::uint64_t x1 = a.xs_[i], z1 = a.zs_[i], x2 = b.xs_[i], z2 = b.zs_[i];
    // XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i.
    const std::uint64_t plus = (x1 & ~z1 & x2 & z2) | (x1 & z1 & ~x2 & z2) | (~x1 & z1 & x2 & ~z2);
    const std::uint64_t minus = (x1 & z1 & x2 & ~z2) | (~x1 & z1 & x2 & z2) | (x1 & ~z1 & ~x2 & z2);
    phase += std::popcount(plus) - std::popcount(minus);
    out.xs_[i] = x1 ^ x2;
    out.zs_[i] = z1 ^ z2;
  }
  out.phase_ = mod4(phase);
  return out;
}

PauliOperator multiply(const PauliOperator& a, const PauliOperator& b) { return a * b; }

bool commutes(const PauliOperator& a, const PauliOperator& b) {
  require_same_size(a, b);
  std::size_t parity = 0;
  const auto& ax = a.x_words();
  const auto& az = a.z_words();
  const auto& bx = b.x_words();
  const auto& bz = b.z_words();
  for (std::size_t i = 0; i < ax.size(); ++i) parity += std::popcount((ax[i] & bz[i]) ^ (az[i] & bx[i]));
  return parity % 2 == 0;
}

std::size_t weight(const PauliOperator& a) { return a.weight(); }

Eigen::MatrixXcd to_dense(const PauliOperator& a, std::size_t dense_limit) {
  const std::size_t n = a.num_qubits();
  if (n > dense_limit) {
    throw std::length_error("dense conversion of " + std::to_string(n) + "-qubit Pauli exceeds limit of " +
                            std::to_string(dense_limit));
  }
  const std::size_t dim = std::size_t{1} << n;
  const std::uint64_t xm = a.x_index_mask();
  const std::uint64_t zm = a.z_index_mask();
  const std::complex<double> global = i_pow(a.phase_power() + static_cast<int>(a.y_count()));
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    const double sign = (std::popcount(col & zm) % 2) ? -1.0 : 1.0;
    m(col ^ xm, col) = global * sign;
  }
  return m;
}

void apply_pauli_add(const PauliOperator& p, std::complex<double> coeff, const std::complex<double>* in,
                     std::complex<double>* out) {
  const std::size_t dim = std::size_t{1} << p.num_qubits();
  const std::uint64_t xm = p.x_index_mask();
  const std::uint64_t zm = p.z_index_mask();
  const std::complex<double> c = coeff * i_pow(p.phase_power() + static_cast<int>(p.y_count()));
  for (std::size_t i = 0; i < dim; ++i) {
    const std::complex<double> v = (std::popcount(i & zm) & 1) ? -in[i] : in[i];
    out[i ^ xm] += c * v;
  }
}

void for_each_pauli_of_weight(std::size_t n, std::size_t w,
                              const std::function<bool(const PauliOperator&)>& visit) {
  if (w > n) return;
  std::vector<std::string> strings;
  std::vector<std::size_t> pos(w);
  for (std::size_t i = 0; i < w; ++i) pos[i] = i;
  static constexpr char kKinds[3] = {'X', 'Y', 'Z'};
  while (true) {
    std::size_t combos = 1;
    for (std::size_t i = 0; i < w; ++i) combos *= 3;
    for (std::size_t c = 0; c < combos; ++c) {
      std::string s(n, 'I');
      std::size_t code = c;
      for (std::size_t i = w; i-- > 0;) {
        s[pos[i]] = kKinds[code % 3];
        code /= 3;
      }
      strings.push_back(std::move(s));
    }
    // next combination
    std::size_t i = w;
    while (i > 0 && pos[i - 1] == n - w + i - 1) --i;
    if (i == 0) break;
    ++pos[i - 1];
    for (std::size_t j = i; j < w; ++j) pos[j] = pos[j - 1] + 1;
  }
  // 'I' < 'X' < 'Y' < 'Z' already holds in ASCII.
  std::sort(strings.begin(), strings.end());
  for (const auto& s : strings)
    if (!visit(PauliOperator::parse(s))) return;
}

std::size_t PauliHash::operator()(const PauliOperator& p) const noexcept {
  std::size_t h = std::hash<int>{}(p.phase_power()) ^ (p.num_qubits() * 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = 0; i < p.x_words().size(); ++i) {
    h ^= std::hash<std::uint64_t>{}(p.x_words()[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<std::uint64_t>{}(p.z_words()[i] * 31) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

}  // namespace mbhqc
