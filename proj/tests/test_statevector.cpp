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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "falqon_mst/statevector.hpp"
#include "oracles.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace falqon_mst;
using oracle::CMatrix;
using oracle::CVector;

double max_error(const StateVector& psi, const CVector& ref) {
  double e = 0.0;
  for (std::size_t s = 0; s < psi.size(); ++s) e = std::max(e, std::abs(psi[s] - ref(Eigen::Index(s))));
  return e;
}

TEST(InitPlusState, SingleQubit) {
  const auto psi = init_plus_state(1);
  EXPECT_NEAR(psi[0].real(), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(psi[1].real(), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(psi[0].imag(), 0.0);
}

TEST(InitPlusState, NormAndRange) {
  for (int m = 1; m <= 20; ++m) EXPECT_NEAR(init_plus_state(m).norm_squared(), 1.0, 1e-12);
  EXPECT_THROW(init_plus_state(0), std::out_of_range);
  EXPECT_THROW(init_plus_state(23), std::out_of_range);
  EXPECT_THROW(init_plus_state(10, 8), std::out_of_range);
}

TEST(InitPlusState, EnergyIsMeanOfDiagonal) {
  SplitMix64 rng(1);
  const auto d = oracle::random_diagonal(6, rng);
  double mean = 0.0;
  for (double v : d.values()) mean += v;
  mean /= double(d.size());
  EXPECT_NEAR(energy(init_plus_state(6), d), mean, 1e-12);
}

TEST(DiagonalPhase, IdentityAndGlobalPhase) {
  SplitMix64 rng(2);
  auto psi = oracle::random_state(3, rng);
  const auto before = psi;
  const auto d = oracle::random_diagonal(3, rng);
  apply_diagonal_phase(psi, d, 0.0);
  for (std::size_t s = 0; s < 8; ++s) EXPECT_EQ(psi[s], before[s]);
  apply_diagonal_phase(psi, DiagonalOperator(std::vector<double>(8, 2.7)), 0.3);
  for (std::size_t s = 0; s < 8; ++s) EXPECT_NEAR(std::norm(psi[s]), std::norm(before[s]), 1e-15);
}

TEST(DiagonalPhase, MatchesDenseExponential) {
  SplitMix64 rng(3);
  for (int m = 1; m <= 6; ++m) {
    auto psi = oracle::random_state(m, rng);
    const auto d = oracle::random_diagonal(m, rng);
    const double dt = rng.uniform(-0.5, 0.5);
    const CMatrix u = (CMatrix(oracle::dense_diagonal(d)) * std::complex<double>(0, -dt)).exp();
    const CVector ref = u * oracle::to_eigen(psi);
    apply_diagonal_phase(psi, d, dt);
    EXPECT_LE(max_error(psi, ref), m <= 3 ? 1e-12 : 1e-10);
  }
}

TEST(DiagonalPhase, PropagatorAgreesWithDirectApplication) {
  SplitMix64 rng(4);
  auto a = oracle::random_state(5, rng);
  auto b = a;
  const auto d = oracle::random_diagonal(5, rng);
  apply_diagonal_phase(a, d, 0.01);
  DiagonalPropagator(d, 0.01).apply(b);
  for (std::size_t s = 0; s < a.size(); ++s) EXPECT_EQ(a[s], b[s]);
}

TEST(DiagonalPhase, DimensionMismatch) {
  auto psi = init_plus_state(3);
  EXPECT_THROW(apply_diagonal_phase(psi, DiagonalOperator(std::vector<double>(4, 0.0)), 0.1),
               std::invalid_argument);
}

TEST(DriverRotation, ZeroBetaIsIdentity) {
  SplitMix64 rng(5);
  auto psi = oracle::random_state(4, rng);
  const auto before = psi;
  apply_driver_rotation(psi, DriverSpec::all(4), 0.0, 0.01);
  for (std::size_t s = 0; s < psi.size(); ++s) EXPECT_EQ(psi[s], before[s]);
}

TEST(DriverRotation, HalfPiFlip) {
  auto psi = StateVector::basis(1, 0);
  apply_driver_rotation(psi, DriverSpec::all(1), std::numbers::pi / 2, 1.0);
  EXPECT_NEAR(std::abs(psi[0]), 0.0, 1e-15);
  EXPECT_NEAR(psi[1].real(), 0.0, 1e-15);
  EXPECT_NEAR(psi[1].imag(), -1.0, 1e-15);
}

TEST(DriverRotation, MatchesDenseKroneckerPropagator) {
  SplitMix64 rng(6);
  for (int m = 1; m <= 6; ++m) {
    auto psi = oracle::random_state(m, rng);
    DriverSpec driver = DriverSpec::all(m);
    if (m >= 4) driver.qubits = {0, 2, m - 1};
    const double beta = rng.uniform(-3, 3), dt = rng.uniform(0.01, 0.5);
    const CMatrix u = (oracle::dense_driver(m, driver.qubits) * std::complex<double>(0, -beta * dt)).exp();
    const CVector ref = u * oracle::to_eigen(psi);
    apply_driver_rotation(psi, driver, beta, dt);
    EXPECT_LE(max_error(psi, ref), m <= 3 ? 1e-12 : 1e-10) << "m=" << m;
  }
}

TEST(DriverRotation, InverseRestoresState) {
  SplitMix64 rng(7);
  auto psi = oracle::random_state(6, rng);
  const auto before = psi;
  apply_driver_rotation(psi, DriverSpec::all(6), 1.7, 0.2);
  apply_driver_rotation(psi, DriverSpec::all(6), -1.7, 0.2);
  EXPECT_LE(max_error(psi, oracle::to_eigen(before)), 1e-12);
}

TEST(DriverRotation, RejectsBadQubits) {
  auto psi = init_plus_state(3);
  EXPECT_THROW(apply_driver_rotation(psi, DriverSpec{{3}}, 1.0, 0.1), std::out_of_range);
}

TEST(Commutator, RealStatesAndConstantDiagonalGiveZero) {
  SplitMix64 rng(8);
  const auto d = oracle::random_diagonal(4, rng);
  std::vector<Amplitude> real(16);
  for (auto& a : real) a = rng.uniform(-1, 1);
  StateVector psi(real);
  EXPECT_EQ(commutator_expectation(psi, d, DriverSpec::all(4)), 0.0);
  const auto complex_state = oracle::random_state(4, rng);
  EXPECT_NEAR(commutator_expectation(complex_state, DiagonalOperator(std::vector<double>(16, 3.0)),
                                     DriverSpec::all(4)),
              0.0, 1e-15);
}

TEST(Commutator, MatchesDenseCommutator) {
  SplitMix64 rng(9);
  for (int m = 1; m <= 6; ++m) {
    const auto psi = oracle::random_state(m, rng);
    const auto d = oracle::random_diagonal(m, rng);
    DriverSpec driver = DriverSpec::all(m);
    if (m == 5) driver.qubits = {1, 3};
    const CMatrix hd = oracle::dense_driver(m, driver.qubits);
    const CMatrix hp = oracle::dense_diagonal(d);
    const CMatrix obs = std::complex<double>(0, 1) * (hd * hp - hp * hd);
    const CVector v = oracle::to_eigen(psi);
    const std::complex<double> ref = v.dot(obs * v);  // conj(v)^T obs v
    EXPECT_NEAR(ref.imag(), 0.0, 1e-12);
    const double got = commutator_expectation(psi, d, driver);
    EXPECT_NEAR(got, ref.real(), 1e-10) << "m=" << m;
    // negating H_p flips the sign
    std::vector<double> neg(d.values().begin(), d.values().end());
    for (auto& x : neg) x = -x;
    EXPECT_NEAR(commutator_expectation(psi, DiagonalOperator(neg), driver), -got, 1e-12);
  }
}

TEST(Energy, BasisUniformAndDense) {
  SplitMix64 rng(10);
  const auto d = oracle::random_diagonal(3, rng);
  for (BasisIndex s = 0; s < 8; ++s) EXPECT_EQ(energy(StateVector::basis(3, s), d), d[s]);
  for (int m = 1; m <= 6; ++m) {
    const auto psi = oracle::random_state(m, rng);
    const auto dm = oracle::random_diagonal(m, rng);
    const CVector v = oracle::to_eigen(psi);
    const std::complex<double> ref = v.dot(oracle::dense_diagonal(dm) * v);
    EXPECT_NEAR(energy(psi, dm), ref.real(), m <= 3 ? 1e-12 : 1e-10);
  }
  EXPECT_THROW(energy(init_plus_state(2), d), std::invalid_argument);
}

TEST(TopK, BasisState) {
  const auto top = top_k_probabilities(StateVector::basis(4, 9), 1);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].state, 9u);
  EXPECT_EQ(top[0].probability, 1.0);
}

TEST(TopK, UniformTiesByIndex) {
  const auto top = top_k_probabilities(init_plus_state(2), 4);
  ASSERT_EQ(top.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(top[i].state, i);
    EXPECT_NEAR(top[i].probability, 0.25, 1e-15);
  }
}

TEST(TopK, SortedDescendingAndRange) {
  SplitMix64 rng(11);
  const auto psi = oracle::random_state(6, rng);
  const auto top = top_k_probabilities(psi, 10);
  for (std::size_t i = 1; i < top.size(); ++i) EXPECT_GE(top[i - 1].probability, top[i].probability);
  EXPECT_THROW(top_k_probabilities(psi, 0), std::out_of_range);
  EXPECT_THROW(top_k_probabilities(psi, 65), std::out_of_range);
}

TEST(Simulator, NormPreservedOverManyRandomGates) {
  SplitMix64 rng(12);
  auto psi = oracle::random_state(6, rng);
  const auto d = oracle::random_diagonal(6, rng, -50, 50);
  for (int k = 0; k < 10000; ++k) {
    if (rng.below(2)) apply_diagonal_phase(psi, d, rng.uniform(-1, 1));
    else apply_driver_rotation(psi, DriverSpec::all(6), rng.uniform(-10, 10), rng.uniform(0, 1));
  }
  EXPECT_NEAR(psi.norm_squared(), 1.0, 1e-9);
}

TEST(Simulator, ReductionsIndependentOfThreadCount) {
  SplitMix64 rng(13);
  const auto psi = oracle::random_state(14, rng);
  const auto d = oracle::random_diagonal(14, rng);
  const double e1 = energy(psi, d);
  const double c1 = commutator_expectation(psi, d, DriverSpec::all(14));
#ifdef _OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(4);
#endif
  EXPECT_EQ(energy(psi, d), e1);
  EXPECT_EQ(commutator_expectation(psi, d, DriverSpec::all(14)), c1);
#ifdef _OPENMP
  omp_set_num_threads(saved);
#endif
}

TEST(BasisText, RoundTripAndOrder) {
  EXPECT_EQ(basis_to_text(0b0110, 5), "01100");
  EXPECT_EQ(basis_from_text("01100"), 0b0110u);
  EXPECT_THROW(basis_from_text("01x"), std::invalid_argument);
}

}  // namespace
