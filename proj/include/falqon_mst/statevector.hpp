// Copyright 2026 The falqon-mst Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace falqon_mst {

using Amplitude = std::complex<double>;
using BasisIndex = std::uint64_t;

inline constexpr int kDefaultQubitCeiling = 22;

namespace detail {

// Reductions are split into fixed-size chunks whose partial sums are
// combined pairwise in chunk order, so results do not depend on the number
// of threads.
inline constexpr std::size_t kChunk = std::size_t{1} << 12;

inline double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

// Calls body(begin, end) for every chunk of [0, count) and returns the
// pairwise sum of the per-chunk results.
template <typename Body>
double chunked_reduce(std::size_t count, Body body) {
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  const auto n_chunks = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
    partial[static_cast<std::size_t>(c)] = body(begin, std::min(count, begin + kChunk));
  }
  return pairwise_sum(partial);
}

inline void check_qubits(int m, int ceiling) {
  if (m < 1 || m > ceiling || m > 62) {
    throw std::out_of_range("qubit count " + std::to_string(m) +
                            " outside [1, " + std::to_string(ceiling) + "]");
  }
}

inline int log2_exact(std::size_t size) {
  if (size < 2 || (size & (size - 1)) != 0) {
    throw std::invalid_argument("length must be a power of two >= 2");
  }
  return std::countr_zero(size);
}

// Index of the p-th basis state whose bit j is clear.
inline BasisIndex with_zero_bit(BasisIndex p, int j) noexcept {
  const BasisIndex low = p & ((BasisIndex{1} << j) - 1);
  return ((p >> j) << (j + 1)) | low;
}

}  // namespace detail

class StateVector {
 public:
  StateVector() = default;

  explicit StateVector(std::vector<Amplitude> amplitudes)
      : m_(detail::log2_exact(amplitudes.size())), amp_(std::move(amplitudes)) {}

  int qubits() const noexcept { return m_; }
  std::size_t size() const noexcept { return amp_.size(); }
  std::span<Amplitude> amplitudes() noexcept { return amp_; }
  std::span<const Amplitude> amplitudes() const noexcept { return amp_; }
  Amplitude& operator[](BasisIndex s) noexcept { return amp_[s]; }
  const Amplitude& operator[](BasisIndex s) const noexcept { return amp_[s]; }

  double norm_squared() const {
    return detail::chunked_reduce(amp_.size(), [&](std::size_t b, std::size_t e) {
      double s = 0.0;
      for (std::size_t i = b; i < e; ++i) s += std::norm(amp_[i]);
      return s;
    });
  }

  static StateVector basis(int m, BasisIndex s) {
    std::vector<Amplitude> a(std::size_t{1} << m);
    a.at(s) = 1.0;
    return StateVector(std::move(a));
  }

 private:
  int m_ = 0;
  std::vector<Amplitude> amp_;
};

// Diagonal Hamiltonian in the computational basis.
class DiagonalOperator {
 public:
  DiagonalOperator() = default;

  explicit DiagonalOperator(std::vector<double> values)
      : m_(detail::log2_exact(values.size())), values_(std::move(values)) {
    for (double v : values_)
      if (!std::isfinite(v)) throw std::invalid_argument("diagonal values must be finite");
  }

  int qubits() const noexcept { return m_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](BasisIndex s) const noexcept { return values_[s]; }

  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max_abs() const {
    double best = 0.0;
    for (double v : values_) best = std::max(best, std::abs(v));
    return best;
  }

 private:
  int m_ = 0;
  std::vector<double> values_;
};

// Set of qubits carrying a Pauli-X term of the driver Hamiltonian.
struct DriverSpec {
  std::vector<int> qubits;

  static DriverSpec all(int m) {
    DriverSpec d;
    d.qubits.resize(static_cast<std::size_t>(m));
    std::iota(d.qubits.begin(), d.qubits.end(), 0);
    return d;
  }

  void validate(int m) const {
    for (int q : qubits)
      if (q < 0 || q >= m) throw std::out_of_range("driver qubit out of range");
  }
};

namespace detail {

// Complex product without the inf/nan recovery of operator*.
inline Amplitude mul(Amplitude a, Amplitude b) noexcept {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

inline void check_same(const StateVector& psi, const DiagonalOperator& d) {
  if (psi.size() != d.size()) throw std::invalid_argument("state/diagonal dimension mismatch");
}

}  // namespace detail

inline StateVector init_plus_state(int m, int ceiling = kDefaultQubitCeiling) {
  detail::check_qubits(m, ceiling);
  const std::size_t dim = std::size_t{1} << m;
  return StateVector(std::vector<Amplitude>(dim, Amplitude(1.0 / std::sqrt(double(dim)), 0.0)));
}

// psi[s] *= exp(-i * d[s] * dt)
inline void apply_diagonal_phase(StateVector& psi, const DiagonalOperator& d, double dt) {
  detail::check_same(psi, d);
  if (!std::isfinite(dt)) throw std::invalid_argument("dt must be finite");
  auto amp = psi.amplitudes();
  const auto values = d.values();
  const auto n = static_cast<std::int64_t>(amp.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < n; ++s) {
    const double phi = -values[s] * dt;
    amp[s] = detail::mul(amp[s], Amplitude(std::cos(phi), std::sin(phi)));
  }
}

// exp(-i * diag * dt) tabulated once for repeated application.
class DiagonalPropagator {
 public:
  DiagonalPropagator(const DiagonalOperator& d, double dt) : phases_(d.size()) {
    const auto values = d.values();
    for (std::size_t s = 0; s < phases_.size(); ++s) {
      const double phi = -values[s] * dt;
      phases_[s] = Amplitude(std::cos(phi), std::sin(phi));
    }
  }

  void apply(StateVector& psi) const {
    if (psi.size() != phases_.size()) throw std::invalid_argument("state/propagator dimension mismatch");
    auto amp = psi.amplitudes();
    const auto n = static_cast<std::int64_t>(amp.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < n; ++s) amp[s] = detail::mul(amp[s], phases_[s]);
  }

 private:
  std::vector<Amplitude> phases_;
};

// Applies exp(-i * beta * dt * X_j) for every driver qubit j. The factors
// commute, so this is the exact driver propagator.
inline void apply_driver_rotation(StateVector& psi, const DriverSpec& driver,
                                  double beta, double dt) {
  driver.validate(psi.qubits());
  const double theta = beta * dt;
  if (theta == 0.0) return;
  const double c = std::cos(theta);
  const double sn = std::sin(theta);
  auto amp = psi.amplitudes();
  const auto pairs = static_cast<std::int64_t>(amp.size() / 2);
  for (int j : driver.qubits) {
    const BasisIndex bit = BasisIndex{1} << j;
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < pairs; ++p) {
      const BasisIndex s0 = detail::with_zero_bit(static_cast<BasisIndex>(p), j);
      const BasisIndex s1 = s0 | bit;
      const Amplitude a = amp[s0];
      const Amplitude b = amp[s1];
      // c a - i sn b, c b - i sn a
      amp[s0] = {c * a.real() + sn * b.imag(), c * a.imag() - sn * b.real()};
      amp[s1] = {c * b.real() + sn * a.imag(), c * b.imag() - sn * a.real()};
    }
  }
}

// <psi| i[H_d, H_p] |psi> with H_d = sum_j X_j over the driver qubits and
// H_p = diag(d). Per driver qubit j and pair (s, t = s ^ e_j) with bit j of
// s clear, the contribution is -2 (d[s] - d[t]) Im(conj(psi[t]) psi[s]).
inline double commutator_expectation(const StateVector& psi, const DiagonalOperator& d,
                                     const DriverSpec& driver) {
  detail::check_same(psi, d);
  driver.validate(psi.qubits());
  const auto amp = psi.amplitudes();
  const auto values = d.values();
  const double sum = detail::chunked_reduce(amp.size() / 2, [&](std::size_t b, std::size_t e) {
    double acc = 0.0;
    for (int j : driver.qubits) {
      const BasisIndex bit = BasisIndex{1} << j;
      for (std::size_t p = b; p < e; ++p) {
        const BasisIndex s = detail::with_zero_bit(p, j);
        const BasisIndex t = s | bit;
        const Amplitude a = amp[s];
        const Amplitude c = amp[t];
        // Im(conj(c) * a)
        const double im = c.real() * a.imag() - c.imag() * a.real();
        acc += (values[s] - values[t]) * im;
      }
    }
    return acc;
  });
  return -2.0 * sum;
}

inline double energy(const StateVector& psi, const DiagonalOperator& d) {
  detail::check_same(psi, d);
  const auto amp = psi.amplitudes();
  const auto values = d.values();
  return detail::chunked_reduce(amp.size(), [&](std::size_t b, std::size_t e) {
    double acc = 0.0;
    for (std::size_t s = b; s < e; ++s) acc += std::norm(amp[s]) * values[s];
    return acc;
  });
}

struct BasisProbability {
  BasisIndex state = 0;
  double probability = 0.0;

  friend bool operator==(const BasisProbability&, const BasisProbability&) = default;
};

// Exact k most probable basis states, probability descending, ties by
// ascending basis index.
inline std::vector<BasisProbability> top_k_probabilities(const StateVector& psi, std::size_t k) {
  if (k < 1 || k > psi.size()) throw std::out_of_range("k outside [1, 2^m]");
  const auto amp = psi.amplitudes();
  std::vector<BasisIndex> order(amp.size());
  std::iota(order.begin(), order.end(), BasisIndex{0});
  auto before = [&](BasisIndex x, BasisIndex y) {
    const double px = std::norm(amp[x]);
    const double py = std::norm(amp[y]);
    return px != py ? px > py : x < y;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), before);
  std::vector<BasisProbability> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back({order[i], std::norm(amp[order[i]])});
  return out;
}

// Bit j of the index is variable j; the text form lists variable 0 first.
inline std::string basis_to_text(BasisIndex s, int m) {
  std::string out(static_cast<std::size_t>(m), '0');
  for (int j = 0; j < m; ++j)
    if ((s >> j) & 1U) out[static_cast<std::size_t>(j)] = '1';
  return out;
}

inline BasisIndex basis_from_text(std::string_view text) {
  if (text.empty() || text.size() > 62) throw std::invalid_argument("bitstring length out of range");
  BasisIndex s = 0;
  for (std::size_t j = 0; j < text.size(); ++j) {
    if (text[j] == '1') s |= BasisIndex{1} << j;
    else if (text[j] != '0') throw std::invalid_argument("bitstring must contain only 0 and 1");
  }
  return s;
}

}  // namespace falqon_mst
